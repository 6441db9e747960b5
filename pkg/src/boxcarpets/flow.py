"""Bohmian velocity field and trajectory integration.

The probability flux divided by the density defines a local velocity field;
its integral curves are the streamlines along which probability is
transported.  In one dimension the flow map is order-preserving, so
trajectories seeded in increasing order must stay ordered (the noncrossing
rule checked by ``noncrossing_check``).

Near density nodes the field diverges.  The integrator treats a density
below ``DENSITY_FLOOR`` as a node-proximity signal: the step is rejected
and halved, and once the step floor is reached the affected trajectory is
returned truncated with status ``step-floor-hit`` instead of blowing up.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .decoherence import DecoherenceParams, _support
from .errors import CarpetError, DomainError, NodeProximityError
from .evolution import revival_times
from .spectral import InputSignalSpec, SpectralState, _check_positions

DENSITY_FLOOR = 1e-12

# Dormand-Prince 5(4) pair; the propagated solution is 5th order and the
# last stage is the first evaluation of the next step (FSAL).
_RK_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_RK_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_RK_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_RK_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


class _VelocityField:
    """Vectorized evaluation of the (possibly damped) velocity field.

    Restricted to the modes with nonzero coefficients; evaluation returns the
    velocities together with a mask of positions whose density sits below the
    node floor (velocity forced to zero there).
    """

    def __init__(self, state: SpectralState, params: DecoherenceParams | None):
        c, k, E, even = _support(state)
        if c.size == 0:
            raise DomainError("velocity field undefined for a state with no nonzero coefficients")
        cfg = state.cfg
        self.c = c
        self.k = k
        self.even = even
        self.all_even = bool(even.all())
        self.all_odd = bool(~even.any())
        self.Eh = E / cfg.hbar
        self.gamma = params.gamma if params is not None else 0.0
        self.hm = cfg.hbar / cfg.m
        self.amp = np.sqrt(2.0 / cfg.L)
        if self.gamma > 0.0:
            self.W = np.outer(c, c)
            self.absdEh = np.abs(self.Eh[:, None] - self.Eh[None, :])

    def _modes(self, x: np.ndarray):
        arg = x[:, None] * self.k[None, :]
        s = np.sin(arg)
        co = np.cos(arg)
        if self.all_even:
            phi = self.amp * co
            dphi = (-self.amp * self.k) * s
        elif self.all_odd:
            phi = self.amp * s
            dphi = (self.amp * self.k) * co
        else:
            phi = self.amp * np.where(self.even, co, s)
            dphi = np.where(self.even, -s, co) * (self.amp * self.k)
        return phi, dphi

    def __call__(self, x: np.ndarray, t: float):
        phi, dphi = self._modes(x)
        if self.gamma == 0.0:
            u = self.c * np.exp(-1j * self.Eh * t)
            psi = phi @ u
            dpsi = dphi @ u
            den = psi.real**2 + psi.imag**2
            num = psi.real * dpsi.imag - psi.imag * dpsi.real
        else:
            z = np.exp(-1j * self.Eh * t)
            zz = np.outer(z, z.conj())
            damp = np.exp((-self.gamma * t) * self.absdEh)
            cm = self.W * (zz.real * damp)
            sm = self.W * (zz.imag * damp)
            den = ((phi @ cm) * phi).sum(axis=1)
            num = ((dphi @ sm) * phi).sum(axis=1)
        bad = den < DENSITY_FLOOR
        v = self.hm * num / np.where(bad, 1.0, den)
        v[bad] = 0.0
        return v, bad


def velocity(state: SpectralState, x, t: float, params: DecoherenceParams | None = None):
    """Velocity field value(s) at position(s) ``x`` and time ``t``.

    Real input signals start with a uniform phase, so the field vanishes
    identically at t = 0.  Raises ``NodeProximityError`` where the density
    is below the node floor.
    """
    if not np.isfinite(t) or t < 0.0:
        raise DomainError(f"time must be nonnegative and finite, got {t!r}")
    xv = np.atleast_1d(_check_positions(x, state.cfg))
    field = _VelocityField(state, params)
    v, bad = field(xv, float(t))
    if bad.any():
        where = xv[bad][:8]
        raise NodeProximityError(
            f"density below {DENSITY_FLOOR} at {bad.sum()} position(s)", positions=where
        )
    return v if np.ndim(x) else float(v[0])


def velocity_map(
    state: SpectralState, x: np.ndarray, times: np.ndarray, params: DecoherenceParams | None = None
) -> np.ndarray:
    """Velocity on the (t, x) grid; node-floor positions are set to zero."""
    xv = np.atleast_1d(_check_positions(x, state.cfg))
    times = np.asarray(times, dtype=float)
    if times.size and times.min() < 0.0:
        raise DomainError("times must be nonnegative")
    field = _VelocityField(state, params)
    out = np.empty((times.size, xv.size))
    for j, t in enumerate(times):
        out[j], _ = field(xv, float(t))
    return out


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One integrated streamline: seed, sample times, positions, status."""

    x0: float
    times: np.ndarray
    positions: np.ndarray
    status: str = "completed"

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        p = np.asarray(self.positions, dtype=float)
        if t.shape != p.shape or t.ndim != 1:
            raise DomainError("trajectory times and positions must be matching 1-D arrays")
        if t.size > 1 and np.any(np.diff(t) <= 0.0):
            raise DomainError("trajectory times must be strictly increasing")
        if self.status not in ("completed", "step-floor-hit"):
            raise DomainError(f"unknown trajectory status {self.status!r}")
        t.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "positions", p)


@dataclass(frozen=True)
class EnsembleSpec:
    """How to seed a trajectory ensemble: evenly over the signal support,
    or from an explicit strictly increasing list."""

    count: int = 0
    seeding: str = "uniform"
    seeds: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.seeding not in ("uniform", "explicit"):
            raise DomainError(f"seeding must be 'uniform' or 'explicit', got {self.seeding!r}")
        if self.seeding == "explicit":
            if not self.seeds:
                raise DomainError("explicit seeding requires a non-empty seed list")
            seeds = tuple(float(s) for s in self.seeds)
            if np.any(np.diff(seeds) <= 0.0):
                raise DomainError("explicit seeds must be strictly increasing")
            object.__setattr__(self, "seeds", seeds)
            object.__setattr__(self, "count", len(seeds))
        else:
            if self.seeds is not None:
                raise DomainError("uniform seeding does not take an explicit seed list")
            if self.count < 1:
                raise DomainError(f"ensemble count must be >= 1, got {self.count}")


def ensemble_seeds(spec: EnsembleSpec, signal: InputSignalSpec) -> np.ndarray:
    """Resolve seed positions for ``spec`` against the signal support."""
    lobes = signal.support()
    if spec.seeding == "explicit":
        seeds = np.asarray(spec.seeds, dtype=float)
        inside = np.zeros(seeds.size, dtype=bool)
        for lo, hi in lobes:
            inside |= (seeds >= lo) & (seeds <= hi)
        if not inside.all():
            raise DomainError(f"seeds outside the signal support: {seeds[~inside][:8]}")
        return seeds
    n = spec.count
    per_lobe = [n // len(lobes)] * len(lobes)
    per_lobe[-1] += n - sum(per_lobe)
    parts = []
    for (lo, hi), cnt in zip(lobes, per_lobe):
        if cnt == 0:
            continue
        step = (hi - lo) / cnt
        parts.append(lo + (np.arange(cnt) + 0.5) * step)
    return np.concatenate(parts)


def integrate_trajectory(
    state: SpectralState,
    x0: float,
    t_end: float,
    params: DecoherenceParams | None = None,
    tol: float = 1e-8,
    sample_times: np.ndarray | None = None,
) -> Trajectory:
    """Integrate a single streamline seeded at ``x0`` up to ``t_end``.

    Adaptive Dormand-Prince stepping with per-step relative tolerance
    ``tol``; the path either reaches ``t_end`` (status 'completed') or is
    truncated at a node with status 'step-floor-hit'.
    """
    return integrate_ensemble(
        state,
        EnsembleSpec(seeding="explicit", seeds=(float(x0),)),
        t_end,
        params=params,
        tol=tol,
        sample_times=sample_times,
        _skip_support_check=True,
    )[0]


def integrate_ensemble(
    state: SpectralState,
    spec: EnsembleSpec,
    t_end: float,
    params: DecoherenceParams | None = None,
    tol: float = 1e-8,
    sample_times: np.ndarray | None = None,
    _skip_support_check: bool = False,
) -> list[Trajectory]:
    """Integrate an ensemble of streamlines on a common sample-time grid.

    Trajectories never interact; they are advanced together with a shared
    adaptive step whose per-step error is bounded by ``tol`` for every
    member individually, and sample times are hit exactly by step clipping.
    Failures are reported per trajectory through its status.
    """
    if not np.isfinite(t_end) or t_end <= 0.0:
        raise DomainError(f"t_end must be positive and finite, got {t_end!r}")
    if tol <= 0.0:
        raise DomainError(f"tol must be positive, got {tol!r}")

    if spec.seeding == "uniform" or not _skip_support_check:
        if state.signal is None:
            if spec.seeding == "uniform":
                raise DomainError("uniform seeding requires a state with a known input signal")
            seeds = np.asarray(spec.seeds, dtype=float)
        else:
            seeds = ensemble_seeds(spec, state.signal)
    else:
        seeds = np.asarray(spec.seeds, dtype=float)
    _check_positions(seeds, state.cfg)

    if sample_times is None:
        sample_times = np.linspace(0.0, t_end, 257)
    sample_times = np.asarray(sample_times, dtype=float)
    if sample_times.ndim != 1 or sample_times.size < 1:
        raise DomainError("sample_times must be a non-empty 1-D array")
    if np.any(np.diff(sample_times) <= 0.0):
        raise DomainError("sample_times must be strictly increasing")
    if sample_times[0] < 0.0 or sample_times[-1] > t_end * (1 + 1e-12):
        raise DomainError("sample_times must lie within [0, t_end]")

    tau = revival_times(state.cfg).tau
    field = _VelocityField(state, params)
    recorded, freeze_time = _integrate_batch(
        field,
        seeds,
        sample_times,
        t_end=float(t_end),
        rtol=float(tol),
        atol=float(tol) * 1e-2,
        max_step=tau / 2000.0,
        h_floor=tau * 1e-12,
        half_width=state.cfg.half_width,
    )

    trajectories = []
    for i, seed in enumerate(seeds):
        col = recorded[:, i]
        mask = ~np.isnan(col)
        status = "completed" if np.isinf(freeze_time[i]) else "step-floor-hit"
        trajectories.append(
            Trajectory(x0=float(seed), times=sample_times[mask], positions=col[mask], status=status)
        )
    return trajectories


def _integrate_batch(field, y0, sample_times, t_end, rtol, atol, max_step, h_floor, half_width):
    """Shared-step adaptive RK45 over a batch of independent scalar ODEs.

    Returns the positions recorded at the sample times (NaN once a component
    is frozen) and the per-component freeze time (inf when completed).
    """
    n = y0.size
    y = y0.astype(float).copy()
    t = 0.0
    active = np.ones(n, dtype=bool)
    freeze_time = np.full(n, np.inf)
    ns = sample_times.size
    recorded = np.full((ns, n), np.nan)
    si = 0
    while si < ns and sample_times[si] <= 0.0:
        recorded[si] = y
        si += 1

    k1, bad = field(y, t)
    if bad.any():
        freeze_time[bad] = t
        active &= ~bad

    h = max_step / 8.0
    facold = 1e-4
    growth_cap = 5.0
    steps = 0
    while t < t_end and active.any():
        steps += 1
        if steps > 20_000_000:
            raise CarpetError("trajectory integration stalled (step budget exhausted)")
        if t_end - t <= 1e-14 * max(t_end, 1.0):
            t = t_end  # remaining gap is roundoff
            continue
        h = min(h, max_step, t_end - t)
        target = None
        if si < ns and sample_times[si] - t <= h * (1 + 1e-12):
            target = sample_times[si]
            h = target - t
            if h <= 0.0:
                recorded[si, active] = y[active]
                si += 1
                continue

        ks = [k1]
        floor_mask = None
        for i in range(1, 7):
            yi = y + h * sum(a * kk for a, kk in zip(_RK_A[i], ks))
            vi, bad = field(yi, t + _RK_C[i] * h)
            hit = bad & active
            if hit.any():
                floor_mask = hit
                break
            ks.append(vi)

        if floor_mask is not None:
            # node proximity: halve the step; at the floor, truncate the offenders
            if h <= h_floor:
                freeze_time[floor_mask] = t
                active &= ~floor_mask
                h = max_step / 8.0
            else:
                h *= 0.5
            growth_cap = 1.0
            continue

        y5 = y + h * sum(b * kk for b, kk in zip(_RK_B, ks[:6]))
        err = h * sum(e * kk for e, kk in zip(_RK_E, ks))
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
        ratios = np.abs(err) / scale
        enorm = float(ratios[active].max())

        if enorm <= 1.0:
            y = np.where(active, y5, y)
            over = active & (np.abs(y) > half_width)
            if over.any():
                # reflect roundoff-level overshoot back inside the box
                y = np.where(over, np.sign(y) * (2.0 * half_width) - y, y)
                k1, _ = field(y, target if target is not None else t + h)
            else:
                k1 = ks[6]
            t = target if target is not None else t + h
            if target is not None:
                recorded[si, active] = y[active]
                si += 1
            fac = 5.0 if enorm == 0.0 else 0.9 * enorm**-0.17 * facold**0.04
            h *= min(growth_cap, max(0.2, fac))
            facold = max(enorm, 1e-4)
            growth_cap = 5.0
        else:
            if h <= h_floor:
                drivers = active & (ratios > 1.0)
                freeze_time[drivers] = t
                active &= ~drivers
                h = max_step / 8.0
            else:
                h *= max(0.2, 0.9 * enorm**-0.2)
            growth_cap = 1.0
    return recorded, freeze_time


@dataclass(frozen=True)
class NoncrossingReport:
    """Outcome of the ordering check; ``time``/``pair`` locate the first swap."""

    ok: bool
    time: float | None = None
    pair: tuple[int, int] | None = None


def noncrossing_check(trajectories: list[Trajectory], slack: float = 1e-9) -> NoncrossingReport:
    """Verify that seed ordering is preserved at every shared sample time.

    All trajectories must carry identical sample grids; the ``slack``
    tolerates near-contact of mirror-symmetric paths.
    """
    if len(trajectories) < 2:
        return NoncrossingReport(ok=True)
    times = trajectories[0].times
    for tr in trajectories[1:]:
        if tr.times.shape != times.shape or not np.array_equal(tr.times, times):
            raise DomainError("trajectories do not share a common sample-time grid")
    seeds = np.array([tr.x0 for tr in trajectories])
    if np.any(np.diff(seeds) <= 0.0):
        raise DomainError("trajectories must be ordered by strictly increasing seed")
    pos = np.vstack([tr.positions for tr in trajectories])
    gaps = np.diff(pos, axis=0)
    bad = gaps < -slack
    if not bad.any():
        return NoncrossingReport(ok=True)
    pair_idx, time_idx = np.nonzero(bad)
    j = int(time_idx.min())
    i = int(pair_idx[time_idx == j].min())
    return NoncrossingReport(ok=False, time=float(times[j]), pair=(i, i + 1))
