import numpy as np
import pytest

import boxcarpets as bc
from boxcarpets.errors import DomainError, FitFailure

from conftest import make_state

CHI_INF_X0_ZERO = 0.23465451543055765  # sum of squared populations, N = 50


def test_initial_purity_is_squared_norm(state0, state20, ref_params):
    for state in (state0, state20):
        norm = float(np.sum(state.populations))
        assert bc.purity(state, 0.0, ref_params) == pytest.approx(norm**2, abs=1e-12)


def test_purity_constant_without_damping(state0, rev):
    p0 = bc.DecoherenceParams.coherent()
    chi = bc.purity(state0, np.array([0.0, rev.tau, 8 * rev.tau]), p0)
    assert np.allclose(chi, chi[0], atol=1e-14)


def test_purity_monotone_and_bounded(state0, rev, ref_params):
    t = np.linspace(0.0, 10.0 * rev.tau, 200)
    chi = bc.purity(state0, t, ref_params)
    assert np.all(np.diff(chi) < 0.0)
    chi_inf = bc.purity_asymptote(state0)
    assert np.all(chi >= chi_inf - 1e-12)
    assert chi[0] <= 1.0


def test_purity_approaches_asymptote(state0, rev, ref_params):
    chi = bc.purity(state0, 20.0 * rev.tau, ref_params)
    assert abs(chi - bc.purity_asymptote(state0)) < 1e-6


def test_purity_asymptote_reference_value(state0):
    assert bc.purity_asymptote(state0) == pytest.approx(CHI_INF_X0_ZERO, rel=1e-12)
    assert 0.20 <= bc.purity_asymptote(state0) <= 0.25


def test_purity_gamma_time_scale_property(state0, rev):
    t = 0.7 * rev.tau
    k = 5.0
    a = bc.purity(state0, t, bc.DecoherenceParams(gamma=bc.DEFAULT_GAMMA))
    b = bc.purity(state0, k * t, bc.DecoherenceParams(gamma=bc.DEFAULT_GAMMA / k))
    assert a == pytest.approx(b, rel=1e-12)


def test_offcenter_singles_sit_below_reference(cfg, state0):
    ref = bc.purity_asymptote(state0)
    for x0 in (2.0, 6.0, 12.5, 18.0, 20.0):
        st = bc.decompose_single(bc.InputSignalSpec("single", x0, 10.0), cfg, 50)
        assert bc.purity_asymptote(st) < ref


def test_double_at_quarter_box_matches_centered_single(state0, double125):
    assert abs(bc.purity_asymptote(double125) - bc.purity_asymptote(state0)) < 1e-9


def test_double_roughly_twice_single_at_18(cfg):
    single = bc.decompose_single(bc.InputSignalSpec("single", 18.0, 10.0), cfg, 50)
    double = bc.decompose_double(bc.InputSignalSpec("double", 18.0, 10.0), cfg, 50)
    ratio = bc.purity_asymptote(double) / bc.purity_asymptote(single)
    assert 1.7 <= ratio <= 2.1


def test_quadrature_oracle_agreement(state0, rev, ref_params):
    for t in (0.0, rev.tau):
        closed = bc.purity(state0, t, ref_params)
        quad = bc.purity_via_quadrature(state0, t, ref_params, points=400)
        assert abs(closed - quad) < 2e-3


def test_quadrature_oracle_ignores_spatial_rate(state0, rev, ref_params, loc_params):
    a = bc.purity_via_quadrature(state0, rev.tau, ref_params, points=200)
    b = bc.purity_via_quadrature(state0, rev.tau, loc_params, points=200)
    assert a == b


# -- correlation matrix and decay map ----------------------------------------


def test_correlation_matrix_structure(state0):
    corr = bc.correlation_matrix(state0)
    assert np.array_equal(corr, corr.T)
    assert np.allclose(np.diag(corr), state0.populations, atol=0.0)
    assert np.all(corr[1::2, :] == 0.0) and np.all(corr[:, 1::2] == 0.0)
    assert np.trace(corr) == pytest.approx(1.0 - bc.norm_deficit(state0), abs=1e-12)


def test_decay_time_map(cfg, rev):
    times = bc.decay_time_map(cfg, bc.DEFAULT_GAMMA, 50)
    assert times[0, 2] == pytest.approx(rev.tau / 0.8, rel=1e-12)
    assert np.all(np.isinf(np.diag(times)))
    assert times[0, 2] > times[0, 4] > times[0, 40]
    assert times[0, 9] == times[9, 0]
    with pytest.raises(DomainError):
        bc.decay_time_map(cfg, 0.0, 10)


# -- curves and fits ----------------------------------------------------------


def test_purity_curve_sampling(state0, rev, ref_params):
    curve = bc.purity_curve(state0, 10 * rev.tau, ref_params, samples=80)
    assert curve.times[0] == 0.0
    assert curve.times.size == 80
    assert np.all(np.diff(curve.values) <= 1e-12)
    linear = bc.purity_curve(state0, 10 * rev.tau, ref_params, samples=60, spacing="linear")
    assert np.allclose(np.diff(linear.times), linear.times[1] - linear.times[0])


def test_purity_curve_validation():
    with pytest.raises(DomainError):
        bc.PurityCurve(times=np.array([0.0, 1.0]), values=np.array([0.5, 0.6]))
    with pytest.raises(DomainError):
        bc.PurityCurve(times=np.array([1.0, 0.0]), values=np.array([0.6, 0.5]))
    with pytest.raises(DomainError):
        bc.PurityCurve(times=np.array([0.0, 1.0]), values=np.array([0.5, -0.1]))


def _synthetic_curve(chi0, amps, scales, span, n=200):
    t = np.concatenate([[0.0], np.geomspace(span / 1000.0, span, n - 1)])
    v = chi0 + sum(a * np.exp(-t / s) for a, s in zip(amps, scales))
    return bc.PurityCurve(times=t, values=v)


def test_fit_recovers_synthetic_parameters(rev):
    tau = rev.tau
    curve = _synthetic_curve(0.2, (0.3, 0.3, 0.2), (0.2 * tau, tau, 4 * tau), 10 * tau)
    fit = bc.fit_purity(curve)
    assert fit.chi0 == pytest.approx(0.2, rel=0.05)
    for got, want in zip(fit.amplitudes, (0.3, 0.3, 0.2)):
        assert got == pytest.approx(want, rel=0.05)
    for got, want in zip(fit.timescales, (0.2 * tau, tau, 4 * tau)):
        assert got == pytest.approx(want, rel=0.05)
    assert fit.t0 == 0.0


def test_fit_is_idempotent(state0, rev, ref_params):
    first = bc.fit_purity(bc.purity_curve(state0, 10 * rev.tau, ref_params))
    resampled = _synthetic_curve(first.chi0, first.amplitudes, first.timescales, 10 * rev.tau)
    second = bc.fit_purity(resampled)
    for a, b in zip(first.timescales, second.timescales):
        assert b == pytest.approx(a, rel=0.01)
    assert second.chi0 == pytest.approx(first.chi0, rel=0.01)


def test_fit_of_reference_curve_is_tight(state0, rev, ref_params):
    curve = bc.purity_curve(state0, 10 * rev.tau, ref_params)
    fit = bc.fit_purity(curve)
    assert fit.residual < 1e-3
    assert fit.timescales[0] < fit.timescales[1] < fit.timescales[2]
    assert fit.chi0 == pytest.approx(bc.purity_asymptote(state0), abs=0.02)


def test_fit_rejects_constant_curve():
    t = np.linspace(0.0, 100.0, 80)
    curve = bc.PurityCurve(times=t, values=np.full_like(t, 0.5))
    with pytest.raises(FitFailure):
        bc.fit_purity(curve)


def test_fit_needs_enough_samples(rev):
    curve = _synthetic_curve(0.2, (0.3, 0.3, 0.2), (1.0, 10.0, 100.0), 1000.0, n=20)
    with pytest.raises(DomainError):
        bc.fit_purity(curve)


def test_purity_fit_validation():
    with pytest.raises(DomainError):
        bc.PurityFit(chi0=0.2, amplitudes=(0.1, 0.1, 0.1), timescales=(2.0, 1.0, 3.0), t0=0.0, residual=0.0)
    with pytest.raises(DomainError):
        bc.PurityFit(chi0=-0.1, amplitudes=(0.1, 0.1, 0.1), timescales=(1.0, 2.0, 3.0), t0=0.0, residual=0.0)


# -- sweep ---------------------------------------------------------------------


def test_sweep_shapes_and_trends(cfg):
    xs = np.array([0.0, 6.0, 10.0, 12.5, 14.0, 20.0, 22.0])
    rows = bc.sweep_x0("single", xs, cfg, restarts=4)
    assert len(rows) == 7
    by_x0 = {r.x0: r for r in rows}
    assert by_x0[22.0].error is not None and "x0" in by_x0[22.0].error
    plateau = [by_x0[x].chi_inf for x in (6.0, 10.0, 14.0)]
    assert max(plateau) - min(plateau) < 0.005
    assert by_x0[0.0].chi_inf > max(plateau)
    assert by_x0[20.0].chi_inf < min(plateau)
    ok_rows = [r for r in rows if r.error is None]
    assert all(r.t1 < r.t2 < r.t3 for r in ok_rows)


def test_sweep_double_dip(cfg, state0):
    rows = bc.sweep_x0("double", np.array([10.0, 12.5, 15.0]), cfg, restarts=4)
    by_x0 = {r.x0: r for r in rows}
    assert by_x0[12.5].chi_inf == pytest.approx(bc.purity_asymptote(state0), abs=1e-9)
    assert by_x0[12.5].chi_inf < by_x0[10.0].chi_inf
    assert by_x0[12.5].chi_inf < by_x0[15.0].chi_inf


def test_single_mode_state_edge_cases(cfg, ref_params):
    state = make_state(cfg, [1.0])
    assert bc.purity(state, 3.0, ref_params) == pytest.approx(1.0, abs=1e-14)
    assert bc.purity_asymptote(state) == 1.0
    with pytest.raises(DomainError):
        bc.purity(state, -1.0, ref_params)
