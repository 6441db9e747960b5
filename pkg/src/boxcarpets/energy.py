"""Energy-domain observables: purity decay, its triple-exponential fit,
correlation matrices, and the pair decay-time map.

The purity Tr(rho^2) of a damped state has the closed form

    chi(t) = sum_a p_a^2 + 2 sum_{a'<a} p_a p_a' exp(-2 beta_aa' t),

which decays from (sum p)^2 toward chi_inf = sum p^2.  A quadrature route
integrating |rho(x, x'; t)|^2 over the box square provides the independent
cross-check.  Decay curves are summarized by fitting a baseline plus three
exponentials with distinct timescales.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .decoherence import DecoherenceParams, density_matrix_grid
from .errors import DomainError, FitFailure
from .evolution import revival_times
from .quadrature import simpson_weights
from .spectral import CavityConfig, InputSignalSpec, SpectralState, decompose, _check_count

DEFAULT_FIT_RESTARTS = 20


def purity(state: SpectralState, t, params: DecoherenceParams):
    """Closed-form purity at time(s) ``t``; spatial damping does not enter."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr < 0.0) or not np.all(np.isfinite(t_arr)):
        raise DomainError("purity times must be nonnegative and finite")
    p = state.populations
    rates = 2.0 * params.gamma * np.abs(state.energies[:, None] - state.energies[None, :]) / state.cfg.hbar
    out = np.array([p @ (np.exp(-rates * tt) @ p) for tt in t_arr])
    return out if np.ndim(t) else float(out[0])


def purity_asymptote(state: SpectralState) -> float:
    """Long-time purity limit, the sum of squared populations."""
    return float(np.sum(state.populations**2))


def purity_via_quadrature(
    state: SpectralState, t: float, params: DecoherenceParams, points: int = 400
) -> float:
    """Oracle purity: Simpson quadrature of |rho(x, x'; t)|^2 over the box square.

    The spatial damping term is excluded (the closed form has none), so only
    ``params.gamma`` enters.
    """
    x = np.linspace(-state.cfg.half_width, state.cfg.half_width, points)
    bare = DecoherenceParams(gamma=params.gamma, lam=0.0, lambda_mode="off")
    grid = density_matrix_grid(state, x, x, t, bare)
    w = simpson_weights(x)
    return float(w @ np.abs(grid.values) ** 2 @ w)


@dataclass(frozen=True, eq=False)
class PurityCurve:
    """Sampled purity decay: strictly increasing times, nonincreasing values."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size < 2:
            raise DomainError("purity curve needs matching 1-D time and value arrays")
        if np.any(np.diff(t) <= 0.0) or t[0] < 0.0:
            raise DomainError("purity curve times must be nonnegative and strictly increasing")
        if np.any(v <= 0.0) or np.any(v > 1.0 + 1e-9):
            raise DomainError("purity values must lie in (0, 1]")
        if np.any(np.diff(v) > 1e-12):
            raise DomainError("purity values must be nonincreasing")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)


def purity_curve(
    state: SpectralState,
    t_max: float,
    params: DecoherenceParams,
    samples: int = 200,
    spacing: str = "log",
) -> PurityCurve:
    """Sample the closed-form purity on [0, t_max].

    Log spacing (the default) concentrates samples on the initial falloff,
    which is where the fit needs resolution; t = 0 is always included.
    """
    if t_max <= 0.0 or samples < 2:
        raise DomainError("purity curve needs t_max > 0 and at least 2 samples")
    if spacing == "log":
        times = np.concatenate([[0.0], np.geomspace(t_max / 1000.0, t_max, samples - 1)])
    elif spacing == "linear":
        times = np.linspace(0.0, t_max, samples)
    else:
        raise DomainError(f"spacing must be 'log' or 'linear', got {spacing!r}")
    return PurityCurve(times=times, values=purity(state, times, params))


@dataclass(frozen=True)
class PurityFit:
    """Baseline plus three decaying exponentials summarizing a purity curve."""

    chi0: float
    amplitudes: tuple[float, float, float]
    timescales: tuple[float, float, float]
    t0: float
    residual: float

    def __post_init__(self):
        ts = self.timescales
        if not (0.0 < ts[0] < ts[1] < ts[2]):
            raise DomainError("fit timescales must be positive and strictly increasing")
        if self.chi0 <= 0.0:
            raise DomainError("fit baseline must be positive")

    def evaluate(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.full_like(t, self.chi0)
        for amp, scale in zip(self.amplitudes, self.timescales):
            out = out + amp * np.exp(-(t - self.t0) / scale)
        return out


def fit_purity(curve: PurityCurve, restarts: int = DEFAULT_FIT_RESTARTS, seed: int = 0) -> PurityFit:
    """Fit a baseline plus three exponentials to a purity curve.

    The onset time is pinned to the first sample, removing its degeneracy
    with the amplitudes.  For each candidate triple of timescales the
    baseline and amplitudes come from a linear solve; damped least squares
    then refines the log-timescales, restarted from jittered log-spaced
    initial guesses.  Raises ``FitFailure`` (best candidate attached) when
    no restart produces a valid, strictly ordered fit.
    """
    times = curve.times
    vals = curve.values
    if times.size < 50:
        raise DomainError(f"fit needs at least 50 samples, got {times.size}")
    t0 = float(times[0])
    dt = times - t0
    span = float(dt[-1])
    if (vals.max() - vals.min()) <= 1e-12 * max(vals.max(), 1e-300):
        raise FitFailure("curve shows no decay to fit")

    def solve_amplitudes(ts):
        # the search may drive a timescale toward zero; floor it so the
        # design column degrades to a spike instead of NaNs
        ts = np.maximum(ts, span * 1e-12)
        design = np.column_stack([np.ones_like(dt)] + [np.exp(-dt / s) for s in ts])
        coef, *_ = np.linalg.lstsq(design, vals, rcond=None)
        return coef, design @ coef - vals

    def residual(theta):
        return solve_amplitudes(np.exp(theta))[1]

    rng = np.random.default_rng(seed)
    base = np.log(np.geomspace(span / 100.0, span, 3))
    best = None
    for i in range(max(restarts, 1)):
        theta0 = base if i == 0 else base + rng.uniform(-1.5, 1.5, size=3)
        try:
            sol = least_squares(residual, theta0, method="lm", xtol=1e-14, ftol=1e-14, max_nfev=4000)
        except Exception:
            continue
        rms = float(np.sqrt(np.mean(sol.fun**2)))
        if best is None or rms < best[0]:
            best = (rms, np.exp(sol.x))

    if best is None:
        raise FitFailure("no restart converged")
    rms, ts = best
    coef, _ = solve_amplitudes(ts)
    order = np.argsort(ts)
    ts = tuple(float(s) for s in ts[order])
    amps = tuple(float(a) for a in coef[1:][order])
    candidate = {"chi0": float(coef[0]), "amplitudes": amps, "timescales": ts, "t0": t0, "residual": rms}
    if not (0.0 < ts[0] < ts[1] < ts[2]):
        raise FitFailure("fitted timescales are degenerate", best=candidate)
    if coef[0] <= 0.0:
        raise FitFailure("fitted baseline is not positive", best=candidate)
    return PurityFit(chi0=float(coef[0]), amplitudes=amps, timescales=ts, t0=t0, residual=rms)


def correlation_matrix(state: SpectralState) -> np.ndarray:
    """Mode-pair correlation matrix c_a c_a' (the t = 0 coherences)."""
    return np.outer(state.coeffs, state.coeffs)


def decay_time_map(cfg: CavityConfig, gamma: float, N: int = 50) -> np.ndarray:
    """Pair decay times 1 / (gamma w_aa'); the diagonal never decays (inf).

    Independent of any input signal: only the mode energies and gamma enter.
    """
    if not np.isfinite(gamma) or gamma <= 0.0:
        raise DomainError(f"decay-time map requires gamma > 0, got {gamma!r}")
    N = _check_count(N)
    alphas = np.arange(1, N + 1)
    E = (cfg.hbar * np.pi * alphas / cfg.L) ** 2 / (2.0 * cfg.m)
    omega = np.abs(E[:, None] - E[None, :]) / cfg.hbar
    with np.errstate(divide="ignore"):
        times = 1.0 / (gamma * omega)
    np.fill_diagonal(times, np.inf)
    return times


@dataclass(frozen=True)
class SweepRow:
    """One sweep entry: asymptotic purity and fitted timescales at a center x0."""

    x0: float
    chi_inf: float = np.nan
    t1: float = np.nan
    t2: float = np.nan
    t3: float = np.nan
    residual: float = np.nan
    error: str | None = None


def sweep_x0(
    kind: str,
    x0_values,
    cfg: CavityConfig,
    N: int = 50,
    gamma: float | None = None,
    w: float = 10.0,
    span_tau: float = 10.0,
    samples: int = 200,
    restarts: int = DEFAULT_FIT_RESTARTS,
    seed: int = 0,
) -> list[SweepRow]:
    """Asymptotic purity and fitted decay times across signal centers.

    Invalid centers (truncated or overlapping signals) produce an error row
    and the sweep continues.  Deterministic for fixed inputs.
    """
    from .decoherence import DEFAULT_GAMMA

    g = DEFAULT_GAMMA if gamma is None else float(gamma)
    params = DecoherenceParams(gamma=g)
    span = span_tau * revival_times(cfg).tau
    rows = []
    for x0 in np.asarray(x0_values, dtype=float):
        try:
            spec = InputSignalSpec(kind=kind, x0=float(x0), w=w)
            state = decompose(spec, cfg, N)
            chi_inf = purity_asymptote(state)
            fit = fit_purity(purity_curve(state, span, params, samples=samples), restarts=restarts, seed=seed)
            rows.append(
                SweepRow(
                    x0=float(x0),
                    chi_inf=chi_inf,
                    t1=fit.timescales[0],
                    t2=fit.timescales[1],
                    t3=fit.timescales[2],
                    residual=fit.residual,
                )
            )
        except (DomainError, FitFailure) as exc:
            rows.append(SweepRow(x0=float(x0), error=str(exc)))
    return rows
