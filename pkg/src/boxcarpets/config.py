"""Run configuration: INI-style text with [section] headers and key = value lines.

An empty document yields the reference setup (m = 1, hbar = 1, L = 50,
single signal of width 10 at the center, 50 modes, gamma = 2/(5 pi), spatial
damping from the cavity formula).  Unknown sections or keys are rejected,
and every value is validated against the invariants of the type it feeds.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, replace

import numpy as np

from .decoherence import DEFAULT_GAMMA, DecoherenceParams
from .errors import ConfigError, DomainError
from .flow import EnsembleSpec
from .spectral import CavityConfig, InputSignalSpec

PRODUCT_NAMES = ("carpet", "trajectories", "densmat", "purity", "sweep", "fit", "decaymap")


@dataclass(frozen=True)
class GridSpec:
    """Render-grid shape: axis point counts and the time span in tau units."""

    x_points: int = 1001
    t_points: int = 1001
    t_max_tau: float = 8.0
    snapshots_tau: tuple[float, ...] = (0.0, 0.5, 1.0, 20.0)

    def __post_init__(self):
        if self.x_points < 2 or self.t_points < 2:
            raise DomainError("grid needs at least 2 points per axis")
        if self.t_max_tau <= 0.0:
            raise DomainError("grid t_max_tau must be positive")
        if any(s < 0.0 for s in self.snapshots_tau):
            raise DomainError("snapshot times must be nonnegative")


@dataclass(frozen=True)
class SweepSpec:
    """Signal-center range for sweeps; bounds default per signal kind."""

    start: float | None = None
    stop: float | None = None
    step: float = 0.5

    def __post_init__(self):
        if self.step <= 0.0:
            raise DomainError("sweep step must be positive")

    def values(self, kind: str) -> np.ndarray:
        start = self.start if self.start is not None else (0.0 if kind == "single" else 5.0)
        stop = self.stop if self.stop is not None else 20.0
        if stop < start:
            raise DomainError("sweep stop must not precede start")
        n = int(round((stop - start) / self.step)) + 1
        return start + self.step * np.arange(n)


@dataclass(frozen=True)
class FitSpec:
    """Purity-curve sampling and fit-restart controls."""

    span_tau: float = 10.0
    samples: int = 200
    restarts: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.span_tau <= 0.0 or self.samples < 50 or self.restarts < 1:
            raise DomainError("fit needs span_tau > 0, samples >= 50, restarts >= 1")


@dataclass(frozen=True)
class OutputSpec:
    products: tuple[str, ...] = ()
    directory: str = "out"
    quantity: str = "density"

    def __post_init__(self):
        for p in self.products:
            if p not in PRODUCT_NAMES:
                raise DomainError(f"unknown product {p!r}; expected one of {PRODUCT_NAMES}")
        if self.quantity not in ("density", "velocity"):
            raise DomainError(f"carpet quantity must be 'density' or 'velocity', got {self.quantity!r}")


@dataclass(frozen=True)
class RunConfig:
    cavity: CavityConfig = field(default_factory=CavityConfig)
    signal: InputSignalSpec = field(default_factory=InputSignalSpec)
    n_modes: int = 50
    renormalize: bool = False
    deco: DecoherenceParams = field(default_factory=lambda: DecoherenceParams(gamma=DEFAULT_GAMMA, lambda_mode="formula"))
    grid: GridSpec = field(default_factory=GridSpec)
    ensemble: EnsembleSpec = field(default_factory=lambda: EnsembleSpec(count=20))
    sweep: SweepSpec = field(default_factory=SweepSpec)
    fit: FitSpec = field(default_factory=FitSpec)
    output: OutputSpec = field(default_factory=OutputSpec)

    def __post_init__(self):
        self.signal.validate(self.cavity)
        if self.n_modes < 1:
            raise DomainError("n_modes must be >= 1")


# Section -> {key: parser}; the parsers also carry the validation context.
def _as_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _as_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


_SCHEMA = {
    "cavity": {"m": float, "hbar": float, "l": float},
    "signal": {"kind": str, "x0": float, "w": float},
    "modes": {"count": int, "renormalize": _as_bool},
    "deco": {"gamma": float, "lambda": str},
    "grid": {"x_points": int, "t_points": int, "tmax_tau": float, "snapshots_tau": _as_float_list},
    "ensemble": {"count": int, "seeding": str, "seeds": _as_float_list},
    "sweep": {"start": float, "stop": float, "step": float},
    "fit": {"span_tau": float, "samples": int, "restarts": int, "seed": int},
    "output": {"products": str, "dir": str, "quantity": str},
}


def parse_lambda(text: str) -> tuple[float, str]:
    """Resolve a spatial-damping setting: 'formula', or a nonnegative number."""
    t = text.strip().lower()
    if t == "formula":
        return 0.0, "formula"
    try:
        value = float(t)
    except ValueError:
        raise ConfigError(f"deco.lambda must be 'formula' or a number, got {text!r}") from None
    return value, "off"


def parse_config(text: str) -> RunConfig:
    """Parse configuration text into a validated ``RunConfig``.

    Raises ``ConfigError`` with a line number for syntax problems and with
    the offending field name for unknown keys or invariant violations.
    """
    parser = configparser.ConfigParser(
        interpolation=None, delimiters=("=",), comment_prefixes=("#",), strict=True
    )
    try:
        parser.read_file(io.StringIO(text))
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside of any [section]", line=exc.lineno) from None
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line", line=line) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r} in [{exc.section}]", line=exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", line=exc.lineno) from None
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None

    values: dict[str, dict[str, object]] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            try:
                values.setdefault(section, {})[key] = _SCHEMA[section][key](raw)
            except (ValueError, DomainError) as exc:
                raise ConfigError(f"invalid value for {section}.{key}: {exc}") from None

    def pick(section: str, key: str, default):
        return values.get(section, {}).get(key, default)

    try:
        cavity = CavityConfig(
            m=pick("cavity", "m", 1.0), hbar=pick("cavity", "hbar", 1.0), L=pick("cavity", "l", 50.0)
        )
        signal = InputSignalSpec(
            kind=pick("signal", "kind", "single"),
            x0=pick("signal", "x0", 0.0),
            w=pick("signal", "w", 10.0),
        )
        lam_raw = pick("deco", "lambda", "formula")
        lam, lam_mode = parse_lambda(lam_raw) if isinstance(lam_raw, str) else (lam_raw, "off")
        deco = DecoherenceParams(gamma=pick("deco", "gamma", DEFAULT_GAMMA), lam=lam, lambda_mode=lam_mode)
        grid = GridSpec(
            x_points=pick("grid", "x_points", 1001),
            t_points=pick("grid", "t_points", 1001),
            t_max_tau=pick("grid", "tmax_tau", 8.0),
            snapshots_tau=tuple(pick("grid", "snapshots_tau", (0.0, 0.5, 1.0, 20.0))),
        )
        seeds = values.get("ensemble", {}).get("seeds")
        ensemble = EnsembleSpec(
            count=pick("ensemble", "count", 20),
            seeding=pick("ensemble", "seeding", "explicit" if seeds else "uniform"),
            seeds=tuple(seeds) if seeds else None,
        )
        sweep = SweepSpec(
            start=pick("sweep", "start", None), stop=pick("sweep", "stop", None), step=pick("sweep", "step", 0.5)
        )
        fit = FitSpec(
            span_tau=pick("fit", "span_tau", 10.0),
            samples=pick("fit", "samples", 200),
            restarts=pick("fit", "restarts", 20),
            seed=pick("fit", "seed", 0),
        )
        products_raw = pick("output", "products", "")
        products = tuple(p.strip() for p in products_raw.split(",") if p.strip())
        output = OutputSpec(
            products=products,
            directory=pick("output", "dir", "out"),
            quantity=pick("output", "quantity", "density"),
        )
        return RunConfig(
            cavity=cavity,
            signal=signal,
            n_modes=pick("modes", "count", 50),
            renormalize=pick("modes", "renormalize", False),
            deco=deco,
            grid=grid,
            ensemble=ensemble,
            sweep=sweep,
            fit=fit,
            output=output,
        )
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def parse_config_file(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def serialize_config(config: RunConfig) -> str:
    """Emit configuration text that parses back to an equal ``RunConfig``."""
    lam = "formula" if config.deco.lambda_mode == "formula" else repr(config.deco.lam)
    lines = [
        "[cavity]",
        f"m = {config.cavity.m!r}",
        f"hbar = {config.cavity.hbar!r}",
        f"L = {config.cavity.L!r}",
        "",
        "[signal]",
        f"kind = {config.signal.kind}",
        f"x0 = {config.signal.x0!r}",
        f"w = {config.signal.w!r}",
        "",
        "[modes]",
        f"count = {config.n_modes}",
        f"renormalize = {str(config.renormalize).lower()}",
        "",
        "[deco]",
        f"gamma = {config.deco.gamma!r}",
        f"lambda = {lam}",
        "",
        "[grid]",
        f"x_points = {config.grid.x_points}",
        f"t_points = {config.grid.t_points}",
        f"tmax_tau = {config.grid.t_max_tau!r}",
        "snapshots_tau = " + ",".join(repr(s) for s in config.grid.snapshots_tau),
        "",
        "[ensemble]",
        f"count = {config.ensemble.count}",
        f"seeding = {config.ensemble.seeding}",
    ]
    if config.ensemble.seeds:
        lines.append("seeds = " + ",".join(repr(s) for s in config.ensemble.seeds))
    lines += [
        "",
        "[sweep]",
    ]
    if config.sweep.start is not None:
        lines.append(f"start = {config.sweep.start!r}")
    if config.sweep.stop is not None:
        lines.append(f"stop = {config.sweep.stop!r}")
    lines += [
        f"step = {config.sweep.step!r}",
        "",
        "[fit]",
        f"span_tau = {config.fit.span_tau!r}",
        f"samples = {config.fit.samples}",
        f"restarts = {config.fit.restarts}",
        f"seed = {config.fit.seed}",
        "",
        "[output]",
    ]
    if config.output.products:
        lines.append("products = " + ",".join(config.output.products))
    lines += [
        f"dir = {config.output.directory}",
        f"quantity = {config.output.quantity}",
    ]
    return "\n".join(lines) + "\n"


def apply_overrides(config: RunConfig, **overrides) -> RunConfig:
    """Apply CLI-style overrides, revalidating the affected pieces."""
    cfg = config
    try:
        if "x0" in overrides or "kind" in overrides:
            kind = overrides.get("kind", cfg.signal.kind)
            x0 = overrides.get("x0", cfg.signal.x0)
            if "x0" not in overrides and kind != cfg.signal.kind:
                # a bare kind switch keeps x0 only when it stays valid;
                # otherwise fall back to the smallest admissible center
                candidate = InputSignalSpec(kind=kind, x0=x0, w=cfg.signal.w)
                try:
                    candidate.validate(cfg.cavity)
                except DomainError:
                    x0 = 0.0 if kind == "single" else cfg.signal.w / 2.0
            cfg = replace(cfg, signal=InputSignalSpec(kind=kind, x0=x0, w=cfg.signal.w))
        if "gamma" in overrides or "lam" in overrides:
            lam, mode = cfg.deco.lam, cfg.deco.lambda_mode
            if "lam" in overrides:
                lam, mode = parse_lambda(str(overrides["lam"]))
            cfg = replace(cfg, deco=DecoherenceParams(gamma=overrides.get("gamma", cfg.deco.gamma), lam=lam, lambda_mode=mode))
        if "tmax_tau" in overrides:
            cfg = replace(cfg, grid=replace(cfg.grid, t_max_tau=overrides["tmax_tau"]))
        if "seed_count" in overrides:
            cfg = replace(cfg, ensemble=EnsembleSpec(count=overrides["seed_count"]))
        if "out_dir" in overrides:
            cfg = replace(cfg, output=replace(cfg.output, directory=overrides["out_dir"]))
        if "quantity" in overrides:
            cfg = replace(cfg, output=replace(cfg.output, quantity=overrides["quantity"]))
        if "products" in overrides:
            cfg = replace(cfg, output=replace(cfg.output, products=tuple(overrides["products"])))
        if "renormalize" in overrides:
            cfg = replace(cfg, renormalize=overrides["renormalize"])
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    return cfg
