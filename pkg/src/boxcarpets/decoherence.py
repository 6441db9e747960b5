"""Effective Markovian coherence damping for states evolving in the box.

Each mode pair (alpha, alpha') loses mutual coherence at a rate
beta = gamma * |E' - E| / hbar, so pairs with larger energy separation decay
faster; gamma is a dimensionless control knob.  An optional spatial term
exp(-Lambda (x - x')^2 t) additionally suppresses two-point correlations in
the position representation, with Lambda either given explicitly or set to
the standard localization rate 2 pi hbar / (m L^3).

Populations are untouched (no dissipation), so the probability density
relaxes toward the bare population mixture ``asymptotic_density`` instead of
localizing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .spectral import CavityConfig, SpectralState, _basis, _check_alpha, _check_positions

#: Damping control reproducing beta * tau = (alpha'^2 - alpha^2) / 10.
DEFAULT_GAMMA = 2.0 / (5.0 * np.pi)


def localization_rate(cfg: CavityConfig) -> float:
    """Standard spatial localization rate for this cavity, 2 pi hbar / (m L^3)."""
    return 2.0 * np.pi * cfg.hbar / (cfg.m * cfg.L**3)


@dataclass(frozen=True)
class DecoherenceParams:
    """Damping controls: energy-pair rate ``gamma`` and spatial rate ``lam``.

    ``lambda_mode`` selects how the spatial rate is resolved: 'off' uses the
    explicit ``lam`` value (0 disables the term), 'formula' derives it from
    the cavity via ``localization_rate``.
    """

    gamma: float = 0.0
    lam: float = 0.0
    lambda_mode: str = "off"

    def __post_init__(self):
        if not np.isfinite(self.gamma) or self.gamma < 0.0:
            raise DomainError(f"gamma must be nonnegative and finite, got {self.gamma!r}")
        if not np.isfinite(self.lam) or self.lam < 0.0:
            raise DomainError(f"lambda must be nonnegative and finite, got {self.lam!r}")
        if self.lambda_mode not in ("off", "formula"):
            raise DomainError(f"lambda_mode must be 'off' or 'formula', got {self.lambda_mode!r}")

    @classmethod
    def coherent(cls) -> "DecoherenceParams":
        return cls(gamma=0.0, lam=0.0, lambda_mode="off")

    def effective_lambda(self, cfg: CavityConfig) -> float:
        if self.lambda_mode == "formula":
            return localization_rate(cfg)
        return self.lam


def beta(alpha: int, alpha_prime: int, params: DecoherenceParams, cfg: CavityConfig) -> float:
    """Coherence decay rate of the (alpha, alpha') pair, gamma * |E' - E| / hbar."""
    a = _check_alpha(alpha)
    b = _check_alpha(alpha_prime)
    scale = cfg.hbar * np.pi**2 / (2.0 * cfg.m * cfg.L**2)
    return params.gamma * scale * abs(b**2 - a**2)


def damping_factor(
    alpha: int,
    alpha_prime: int,
    x: float,
    x_prime: float,
    t: float,
    params: DecoherenceParams,
    cfg: CavityConfig,
) -> float:
    """Pair damping exp(-beta t - Lambda (x - x')^2 t); equals 1 at t = 0."""
    _check_time(t)
    _check_positions(x, cfg)
    _check_positions(x_prime, cfg)
    lam = params.effective_lambda(cfg)
    exponent = beta(alpha, alpha_prime, params, cfg) * t + lam * (x - x_prime) ** 2 * t
    return float(np.exp(-exponent))


# ----------------------------------------------------------------------
# Pair-sum evaluation machinery shared by densities and velocity fields
# ----------------------------------------------------------------------


def _support(state: SpectralState):
    """Arrays restricted to modes with nonzero coefficients."""
    idx = np.nonzero(state.coeffs)[0]
    c = state.coeffs[idx]
    alphas = idx + 1
    k = alphas * (np.pi / state.cfg.L)
    E = (state.cfg.hbar * k) ** 2 / (2.0 * state.cfg.m)
    even = alphas % 2 == 1
    return c, k, E, even


def _coherence_matrix(c, E, hbar, t, gamma):
    """Symmetric matrix c_a c_b cos((E_b - E_a) t / hbar) exp(-beta_ab t)."""
    z = np.exp(-1j * (E / hbar) * t)
    cosm = np.outer(z, z.conj()).real
    W = np.outer(c, c)
    if gamma > 0.0 and t > 0.0:
        cosm = cosm * np.exp((-gamma * t / hbar) * np.abs(E[:, None] - E[None, :]))
    return W * cosm


def density_profile(state: SpectralState, x, t: float, gamma: float = 0.0) -> np.ndarray:
    """Damped pair-sum probability density at positions ``x`` and time ``t``.

    Sums populations plus all pairwise coherence terms; the spatial damping
    rate never enters because the density lives on the x = x' diagonal.
    """
    _check_time(t)
    xv = np.atleast_1d(_check_positions(x, state.cfg))
    c, k, E, even = _support(state)
    if c.size == 0:
        out = np.zeros_like(xv)
        return out if np.ndim(x) else float(out)
    phi, _ = _basis(xv, k, even, state.cfg.L)
    C = _coherence_matrix(c, E, state.cfg.hbar, t, gamma)
    rho = np.einsum("pm,mn,pn->p", phi, C, phi, optimize=True)
    rho = _clamp_density(rho)
    return rho if np.ndim(x) else float(rho[0])


def density_map(state: SpectralState, x: np.ndarray, times: np.ndarray, gamma: float = 0.0) -> np.ndarray:
    """Density on the (t, x) grid; row j holds the profile at times[j]."""
    xv = np.atleast_1d(_check_positions(x, state.cfg))
    times = np.asarray(times, dtype=float)
    if times.size and times.min() < 0.0:
        raise DomainError("times must be nonnegative")
    c, k, E, even = _support(state)
    out = np.empty((times.size, xv.size))
    if c.size == 0:
        out.fill(0.0)
        return out
    phi, _ = _basis(xv, k, even, state.cfg.L)
    hbar = state.cfg.hbar
    for j, t in enumerate(times):
        C = _coherence_matrix(c, E, hbar, float(t), gamma)
        out[j] = ((phi @ C) * phi).sum(axis=1)
    return _clamp_density(out)


def decohered_density(state: SpectralState, x, t: float, params: DecoherenceParams):
    """Probability density under coherence damping (diagonal of the density matrix)."""
    return density_profile(state, x, t, gamma=params.gamma)


def asymptotic_density(state: SpectralState, x):
    """Long-time density: the bare population-weighted sum of squared modes."""
    xv = np.atleast_1d(_check_positions(x, state.cfg))
    c, k, E, even = _support(state)
    if c.size == 0:
        out = np.zeros_like(xv)
        return out if np.ndim(x) else float(out)
    phi, _ = _basis(xv, k, even, state.cfg.L)
    rho = phi**2 @ c**2
    return rho if np.ndim(x) else float(rho[0])


@dataclass(frozen=True, eq=False)
class DensityMatrixGrid:
    """Position-representation density matrix sampled on an (x, x') grid."""

    x: np.ndarray
    x_prime: np.ndarray
    t: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != (np.size(self.x), np.size(self.x_prime)):
            raise DomainError("density-matrix values must have shape (len(x), len(x_prime))")


def density_matrix(state: SpectralState, x: float, x_prime: float, t: float, params: DecoherenceParams) -> complex:
    """Density-matrix element rho(x, x'; t) under the damping model."""
    grid = density_matrix_grid(state, np.array([x]), np.array([x_prime]), t, params)
    return complex(grid.values[0, 0])


def density_matrix_grid(
    state: SpectralState,
    x: np.ndarray,
    x_prime: np.ndarray,
    t: float,
    params: DecoherenceParams,
) -> DensityMatrixGrid:
    """Evaluate rho(x, x'; t) on the tensor grid of the two position axes.

    The mode sum carries the pair phases and energy damping; the spatial
    damping factorizes out as exp(-Lambda (x - x')^2 t) on the grid.
    """
    _check_time(t)
    xv = np.atleast_1d(_check_positions(x, state.cfg))
    xpv = np.atleast_1d(_check_positions(x_prime, state.cfg))
    c, k, E, even = _support(state)
    cfg = state.cfg
    if c.size == 0:
        values = np.zeros((xv.size, xpv.size), dtype=complex)
        return DensityMatrixGrid(xv, xpv, float(t), values)
    phi_x, _ = _basis(xv, k, even, cfg.L)
    phi_xp, _ = _basis(xpv, k, even, cfg.L)
    u = c * np.exp(-1j * (E / cfg.hbar) * t)
    M = np.outer(u, u.conj())
    if params.gamma > 0.0 and t > 0.0:
        M = M * np.exp((-params.gamma * t / cfg.hbar) * np.abs(E[:, None] - E[None, :]))
    values = phi_x @ M @ phi_xp.T
    lam = params.effective_lambda(cfg)
    if lam > 0.0 and t > 0.0:
        values = values * np.exp(-lam * t * (xv[:, None] - xpv[None, :]) ** 2)
    return DensityMatrixGrid(xv, xpv, float(t), values)


def _clamp_density(rho: np.ndarray) -> np.ndarray:
    low = float(rho.min()) if rho.size else 0.0
    if low < -1e-12:
        raise DomainError(f"density evaluation produced {low:.3e}; inconsistent state")
    return np.maximum(rho, 0.0)


def _check_time(t: float) -> float:
    if not np.isfinite(t) or t < 0.0:
        raise DomainError(f"time must be nonnegative and finite, got {t!r}")
    return float(t)
