"""Mode basis of a 1-D box cavity and spectral decomposition of input signals.

The cavity is an infinite square well of width L centered at x = 0.  Its
stationary modes are sinusoids indexed by a positive integer alpha; modes
with odd alpha are even about the center, modes with even alpha are odd.
An input signal released inside the cavity is represented by the vector of
its real projection coefficients onto that basis (a ``SpectralState``).

Two signal families are supported: a single half-cosine lobe of width w
centered at x0, and the even superposition of such a lobe with its mirror
image.  Both admit closed-form coefficients; ``decompose_numeric`` provides
the quadrature route used to cross-check them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .quadrature import simpson_weights

# Relative detuning below which a mode is treated as exactly resonant with
# the signal wavenumber (removable singularity of the closed forms).
RESONANCE_RTOL = 1e-9


@dataclass(frozen=True)
class CavityConfig:
    """Physical constants of the box: mass, action quantum, and width."""

    m: float = 1.0
    hbar: float = 1.0
    L: float = 50.0

    def __post_init__(self):
        for name in ("m", "hbar", "L"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0.0:
                raise DomainError(f"CavityConfig.{name} must be positive and finite, got {value!r}")

    @property
    def half_width(self) -> float:
        return self.L / 2.0


@dataclass(frozen=True)
class Mode:
    """One stationary box mode: index, parity, wavenumber, and energy."""

    alpha: int
    parity: str
    k: float
    E: float


def mode(alpha: int, cfg: CavityConfig) -> Mode:
    """Build the mode with index ``alpha`` (1-based) for the given cavity."""
    alpha = _check_alpha(alpha)
    k = alpha * np.pi / cfg.L
    E = (cfg.hbar * k) ** 2 / (2.0 * cfg.m)
    parity = "even" if alpha % 2 == 1 else "odd"
    return Mode(alpha=alpha, parity=parity, k=k, E=E)


def eigenenergy(alpha: int, cfg: CavityConfig) -> float:
    """Energy of mode ``alpha``: (hbar * pi * alpha)^2 / (2 m L^2)."""
    alpha = _check_alpha(alpha)
    return (cfg.hbar * np.pi * alpha / cfg.L) ** 2 / (2.0 * cfg.m)


def eigenmode(md: Mode, x, cfg: CavityConfig):
    """Evaluate a normalized box mode at position(s) ``x``.

    Even-parity modes are sqrt(2/L) cos(kx), odd-parity sqrt(2/L) sin(kx).
    Positions outside [-L/2, L/2] raise ``DomainError``.
    """
    xv = _check_positions(x, cfg)
    amp = np.sqrt(2.0 / cfg.L)
    if md.parity == "even":
        out = amp * np.cos(md.k * xv)
    else:
        out = amp * np.sin(md.k * xv)
    return out if np.ndim(x) else float(out)


def mode_values(alphas: np.ndarray, x, cfg: CavityConfig) -> np.ndarray:
    """Matrix of mode amplitudes, shape (len(x), len(alphas))."""
    xv = np.atleast_1d(_check_positions(x, cfg))
    alphas = np.asarray(alphas, dtype=int)
    k = alphas * (np.pi / cfg.L)
    phi, _ = _basis(xv, k, alphas % 2 == 1, cfg.L)
    return phi


def mode_slopes(alphas: np.ndarray, x, cfg: CavityConfig) -> np.ndarray:
    """Matrix of spatial derivatives of the modes, same shape as mode_values."""
    xv = np.atleast_1d(_check_positions(x, cfg))
    alphas = np.asarray(alphas, dtype=int)
    k = alphas * (np.pi / cfg.L)
    _, dphi = _basis(xv, k, alphas % 2 == 1, cfg.L)
    return dphi


def _basis(xv: np.ndarray, k: np.ndarray, even: np.ndarray, L: float):
    # Hot path: no validation, callers guarantee positions inside the box.
    arg = xv[:, None] * k[None, :]
    s = np.sin(arg)
    c = np.cos(arg)
    amp = np.sqrt(2.0 / L)
    if even.all():
        phi = amp * c
        dphi = (-amp * k) * s
    elif not even.any():
        phi = amp * s
        dphi = (amp * k) * c
    else:
        phi = amp * np.where(even, c, s)
        dphi = np.where(even, -s, c) * (amp * k)
    return phi, dphi


@dataclass(frozen=True)
class InputSignalSpec:
    """Shape of the injected signal: a half-cosine lobe or a mirror pair.

    ``single``: one lobe of width w centered at x0.
    ``double``: the even superposition of lobes centered at +x0 and -x0.
    """

    kind: str = "single"
    x0: float = 0.0
    w: float = 10.0

    def __post_init__(self):
        if self.kind not in ("single", "double"):
            raise DomainError(f"signal kind must be 'single' or 'double', got {self.kind!r}")
        if not np.isfinite(self.w) or self.w <= 0.0:
            raise DomainError(f"signal width w must be positive, got {self.w!r}")
        if not np.isfinite(self.x0):
            raise DomainError(f"signal center x0 must be finite, got {self.x0!r}")

    @property
    def k0(self) -> float:
        """Internal wavenumber of the half-cosine profile, pi / w."""
        return np.pi / self.w

    def validate(self, cfg: CavityConfig) -> None:
        """Check that the signal fits inside the box without truncation or overlap."""
        half = cfg.half_width
        if self.kind == "single":
            if abs(self.x0) + self.w / 2.0 > half:
                raise DomainError(
                    f"single signal truncated by the walls: |x0| + w/2 = "
                    f"{abs(self.x0) + self.w / 2.0} exceeds L/2 = {half} (x0={self.x0})"
                )
        else:
            if self.x0 < self.w / 2.0:
                raise DomainError(
                    f"double signal lobes overlap: x0 = {self.x0} is below w/2 = {self.w / 2.0}"
                )
            if self.x0 + self.w / 2.0 > half:
                raise DomainError(
                    f"double signal truncated by the walls: x0 + w/2 = "
                    f"{self.x0 + self.w / 2.0} exceeds L/2 = {half} (x0={self.x0})"
                )

    def support(self) -> tuple[tuple[float, float], ...]:
        """Intervals where the signal is nonzero, ordered left to right."""
        h = self.w / 2.0
        if self.kind == "single":
            return ((self.x0 - h, self.x0 + h),)
        return ((-self.x0 - h, -self.x0 + h), (self.x0 - h, self.x0 + h))


def input_signal(spec: InputSignalSpec, x) -> np.ndarray:
    """Sample the signal profile at positions ``x`` (zero outside its support)."""
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(xv)
    if spec.kind == "single":
        centers, amp = (spec.x0,), np.sqrt(2.0 / spec.w)
    else:
        centers, amp = (-spec.x0, spec.x0), np.sqrt(1.0 / spec.w)
    for c in centers:
        mask = np.abs(xv - c) <= spec.w / 2.0
        out[mask] += amp * np.cos(np.pi * (xv[mask] - c) / spec.w)
    return out if np.ndim(x) else float(out)


@dataclass(frozen=True, eq=False)
class SpectralState:
    """Real mode coefficients of a signal over a truncated basis.

    Coefficients are signed reals (relative phases of 0 or pi are absorbed
    into the sign); the array is frozen after construction.  ``signal``
    records the originating profile when one is known.
    """

    cfg: CavityConfig
    coeffs: np.ndarray
    signal: InputSignalSpec | None = None

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=float, copy=True)
        if arr.ndim != 1 or arr.size < 1:
            raise DomainError("coefficients must form a non-empty 1-D array")
        if not np.all(np.isfinite(arr)):
            raise DomainError("coefficients must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def N(self) -> int:
        return self.coeffs.size

    @property
    def alphas(self) -> np.ndarray:
        return np.arange(1, self.N + 1)

    @property
    def wavenumbers(self) -> np.ndarray:
        return self.alphas * (np.pi / self.cfg.L)

    @property
    def energies(self) -> np.ndarray:
        return (self.cfg.hbar * self.wavenumbers) ** 2 / (2.0 * self.cfg.m)

    @property
    def populations(self) -> np.ndarray:
        return self.coeffs**2

    def renormalized(self) -> "SpectralState":
        """Rescale the retained coefficients to unit norm."""
        norm2 = float(np.sum(self.coeffs**2))
        if norm2 <= 0.0:
            raise DomainError("cannot renormalize a state with zero norm")
        return SpectralState(self.cfg, self.coeffs / np.sqrt(norm2), self.signal)


def norm_deficit(state: SpectralState) -> float:
    """Probability lost to truncation: 1 - sum of populations, in [0, 1]."""
    deficit = 1.0 - float(np.sum(state.populations))
    if deficit < -1e-12:
        raise DomainError(f"state norm exceeds unity by {-deficit:.3e}")
    return max(deficit, 0.0)


def decompose_single(spec: InputSignalSpec, cfg: CavityConfig, N: int = 50) -> SpectralState:
    """Closed-form coefficients of a single half-cosine lobe.

    Modes whose wavenumber matches the lobe wavenumber k0 = pi/w (alpha * w
    equal to L) take the resonant branch sqrt(w/L) * cos-or-sin(k0 x0); all
    others use the detuned projection formula.
    """
    if spec.kind != "single":
        raise DomainError(f"decompose_single requires kind='single', got {spec.kind!r}")
    spec.validate(cfg)
    N = _check_count(N)
    coeffs = np.zeros(N)
    k0 = spec.k0
    for i, alpha in enumerate(range(1, N + 1)):
        ka = alpha * np.pi / cfg.L
        even = alpha % 2 == 1
        trig = np.cos(ka * spec.x0) if even else np.sin(ka * spec.x0)
        if _resonant(alpha, spec.w, cfg.L):
            coeffs[i] = np.sqrt(spec.w / cfg.L) * (np.cos(k0 * spec.x0) if even else np.sin(k0 * spec.x0))
        else:
            coeffs[i] = 4.0 / np.sqrt(spec.w * cfg.L) * k0 / (k0**2 - ka**2) * trig * np.cos(ka * spec.w / 2.0)
    return SpectralState(cfg, coeffs, spec)


def decompose_double(spec: InputSignalSpec, cfg: CavityConfig, N: int = 50) -> SpectralState:
    """Closed-form coefficients of the mirror-pair signal.

    The profile is even about the center, so every odd-parity coefficient
    vanishes identically; even-parity coefficients carry a sqrt(2) weight
    relative to the single-lobe case.
    """
    if spec.kind != "double":
        raise DomainError(f"decompose_double requires kind='double', got {spec.kind!r}")
    spec.validate(cfg)
    N = _check_count(N)
    coeffs = np.zeros(N)
    k0 = spec.k0
    for i, alpha in enumerate(range(1, N + 1)):
        if alpha % 2 == 0:
            continue
        ka = alpha * np.pi / cfg.L
        if _resonant(alpha, spec.w, cfg.L):
            coeffs[i] = np.sqrt(2.0 * spec.w / cfg.L) * np.cos(k0 * spec.x0)
        else:
            coeffs[i] = (
                4.0
                * np.sqrt(2.0 / (spec.w * cfg.L))
                * k0
                / (k0**2 - ka**2)
                * np.cos(ka * spec.x0)
                * np.cos(ka * spec.w / 2.0)
            )
    return SpectralState(cfg, coeffs, spec)


def decompose(spec: InputSignalSpec, cfg: CavityConfig, N: int = 50) -> SpectralState:
    """Dispatch to the closed-form decomposition matching ``spec.kind``."""
    if spec.kind == "single":
        return decompose_single(spec, cfg, N)
    return decompose_double(spec, cfg, N)


def decompose_numeric(x: np.ndarray, signal: np.ndarray, cfg: CavityConfig, N: int = 50) -> SpectralState:
    """Project sampled signal values onto the mode basis by Simpson quadrature.

    This is the oracle route: it never touches the closed forms.  The samples
    must lie on a uniform grid inside the box with at least 3 points; the
    signal is taken as zero outside the sampled range.
    """
    x = np.asarray(x, dtype=float)
    signal = np.asarray(signal, dtype=float)
    if x.ndim != 1 or x.shape != signal.shape:
        raise DomainError("positions and signal samples must be matching 1-D arrays")
    if x.size < 3:
        raise DomainError("numeric decomposition needs at least 3 sample points")
    _check_positions(x, cfg)
    N = _check_count(N)
    weights = simpson_weights(x)
    phi = mode_values(np.arange(1, N + 1), x, cfg)
    coeffs = phi.T @ (weights * signal)
    return SpectralState(cfg, coeffs, None)


def oracle_grid(cfg: CavityConfig, points: int = 4001) -> np.ndarray:
    """Uniform box-spanning grid used for quadrature cross-checks."""
    if points < 3:
        raise DomainError("oracle grid needs at least 3 points")
    return np.linspace(-cfg.half_width, cfg.half_width, points)


def _resonant(alpha: int, w: float, L: float) -> bool:
    return abs(alpha * w - L) < RESONANCE_RTOL * L


def _check_alpha(alpha) -> int:
    if alpha != int(alpha) or int(alpha) < 1:
        raise DomainError(f"mode index must be a positive integer, got {alpha!r}")
    return int(alpha)


def _check_count(N) -> int:
    if N != int(N) or int(N) < 1:
        raise DomainError(f"mode count N must be a positive integer, got {N!r}")
    return int(N)


def _check_positions(x, cfg: CavityConfig):
    xv = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xv)):
        raise DomainError("positions must be finite")
    if np.any(np.abs(xv) > cfg.half_width):
        worst = float(np.max(np.abs(xv)))
        raise DomainError(f"position outside the box: |x| = {worst} exceeds L/2 = {cfg.half_width}")
    return xv
