import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

import oracles as O
from hawkes_ldp import (BlowUpError, ExplosionBoundary, HawkesParams, find_theta_c,
                        find_theta_d, log_mgf_N, log_mgf_Z, n_cumulant, sensitivity_gamma,
                        sensitivity_r, solve_A, solve_B, solve_C, solve_D, z_cumulant)
from hawkes_ldp.mgf import blowup_cap, blowup_time


def fixed_point(p):
    """Nonzero root of -beta x + e^{alpha x} - 1 (exists when alpha != beta)."""
    f = lambda x: -p.beta * x + math.expm1(p.alpha * x)
    if p.alpha < p.beta:
        return brentq(f, 1e-6, 50.0, xtol=1e-16, rtol=4 * np.finfo(float).eps)
    return brentq(f, -50.0, -1e-6, xtol=1e-16, rtol=4 * np.finfo(float).eps)


def test_zero_is_a_fixed_point(critical):
    for solve in (solve_A, solve_B, solve_C, solve_D):
        curve = solve(critical, 0.0, 2.0)
        assert np.all(curve.values == 0.0)


@pytest.mark.parametrize("ab", [(1.0, 2.0), (2.0, 1.0), (0.5, 3.0)])
def test_nonzero_fixed_point_gives_constant_flow(ab):
    p = HawkesParams(*ab)
    ac = fixed_point(p)
    curve = solve_A(p, ac, 3.0)
    assert np.max(np.abs(curve.values - ac)) < 1e-12


def test_A_matches_fine_rk4(critical):
    curve = solve_A(critical, -1.0, 1.0)
    ref, _ = O.A_grid(1.0, 1.0, [-1.0], 1.0, dt=1e-5)
    assert curve.final == pytest.approx(ref[0], abs=1e-8)
    assert np.all(np.diff(curve.values) > 0) and np.all(curve.values < 0)


def test_B_matches_fine_rk4():
    p = HawkesParams(1.0, 2.0, 1.0)
    _, ref = O.A_grid(1.0, 2.0, [0.2], 1.0, dt=1e-5, mu=1.0)
    assert solve_B(p, 0.2, 1.0).final == pytest.approx(ref[0], abs=1e-8)
    assert np.all(solve_B(HawkesParams(1.0, 2.0), 0.2, 1.0).values == 0.0)


def test_C_matches_fine_rk4(critical):
    ref, _ = O.rk4_flow(1.0, 1.0, [0.28], [0.28], 2.0, dt=1e-5)
    assert solve_C(critical, 0.28, 2.0).final == pytest.approx(ref[0], abs=1e-8)


def test_C_past_boundary_blows_up_like_the_oracle(critical):
    # theta = 0.3 lies above theta_d(2) ~ 0.2903, so the flow explodes before T = 2
    assert find_theta_d(critical, 2.0).theta_c < 0.3
    ref, _ = O.rk4_flow(1.0, 1.0, [0.3], [0.3], 2.0, dt=1e-5)
    assert math.isinf(ref[0])
    curve = solve_C(critical, 0.3, 2.0)
    assert curve.blown_up
    assert curve.blowup_time == pytest.approx(O.blowup_time_mp(1.0, 1.0, 0.3, 0.3), abs=1e-6)


def test_D_matches_fine_rk4():
    p = HawkesParams(0.7, 1.5, 2.0)
    _, ref = O.N_cumulant_grid(0.7, 1.5, [0.4], 1.5, dt=1e-5, mu=2.0)
    assert solve_D(p, 0.4, 1.5).final == pytest.approx(ref[0], abs=1e-8)


def test_C_settles_at_smaller_root_when_subcritical():
    p = HawkesParams(1.0, 2.0, 0.5)
    theta = -0.5
    f = lambda x: -2.0 * x + math.expm1(x) + theta * 2.0
    # the smaller root lies below the minimiser of f at x = log 2
    root = brentq(f, -10.0, math.log(2.0), xtol=1e-15)
    assert solve_C(p, theta, 30.0).final == pytest.approx(root, abs=1e-6)


def test_curve_invariants_and_dense_output(critical):
    curve = solve_A(critical, 0.5, 1.0)
    assert curve.grid[0] == 0.0 and curve.values[0] == 0.5
    assert np.all(np.diff(curve.grid) > 0)
    assert not curve.blown_up and curve.blowup_time is None
    ts = np.linspace(0, 1, 11)
    _, _, times, states = O.rk4_flow(1.0, 1.0, [0.5], 0.0, 1.0, dt=1e-4, keep_every=1000)
    assert np.allclose(curve(times), states[:, 0], atol=1e-7)
    with pytest.raises(ValueError):
        curve.values[0] = 1.0
    with pytest.raises(ValueError):
        curve(1.5)
    buf = io.StringIO()
    curve.to_csv(buf)
    assert buf.getvalue().startswith("t,value\n0,0.5\n")
    assert len(ts) == 11


def test_blown_up_curve_records_time(critical):
    theta = find_theta_c(critical, 1.0).theta_c + 0.1
    curve = solve_A(critical, theta, 1.0)
    assert curve.blown_up
    assert 0 < curve.blowup_time <= 1.0
    assert curve.horizon <= curve.blowup_time
    assert np.all(curve.values <= blowup_cap(1.0))
    expected = O.blowup_time_mp(1.0, 1.0, theta)
    assert curve.blowup_time == pytest.approx(expected, abs=1e-6)


def test_sensitivities_at_zero():
    for p in (HawkesParams(1, 1), HawkesParams(1, 2), HawkesParams(2, 1)):
        for T in (0.5, 2.0):
            assert sensitivity_gamma(p, 0.0, T) == pytest.approx(p.lln_z(T), rel=1e-9)
            assert sensitivity_r(p, 0.0, T) == pytest.approx(p.psi(T), rel=1e-9)


def _fd(fn, theta, h=1e-6):
    return (fn(theta + h) - fn(theta - h)) / (2 * h)


def test_gamma_matches_central_difference(critical):
    fd = _fd(lambda th: z_cumulant(critical, th, 2.0).value, -0.5)
    assert sensitivity_gamma(critical, -0.5, 2.0) == pytest.approx(fd, rel=1e-5)


def test_r_matches_central_difference(critical):
    fd = _fd(lambda th: n_cumulant(critical, th, 1.0).value, 0.2)
    assert sensitivity_r(critical, 0.2, 1.0) == pytest.approx(fd, rel=1e-5)
    assert all(sensitivity_r(critical, th, 1.0) > 0 for th in (-3, -1, 0, 0.3, 0.5))


def test_gamma_increasing_in_theta(critical):
    g = [sensitivity_gamma(critical, th, 1.0) for th in (-1, -0.5, 0, 0.2)]
    assert all(b > a for a, b in zip(g, g[1:]))


def test_sensitivity_past_boundary_raises(critical):
    with pytest.raises(BlowUpError) as info:
        sensitivity_gamma(critical, 5.0, 1.0)
    assert 0 < info.value.blowup_time < 1.0


def test_theta_c_against_quadrature(critical):
    b = find_theta_c(critical, 1.0)
    assert b.theta_c == pytest.approx(O.theta_c_mp(1.0, 1.0, 1.0), abs=1e-6)
    assert b.bracket_width <= 1e-9
    assert find_theta_c(critical, 2.0).theta_c < b.theta_c


@pytest.mark.parametrize("ab,T", [((1, 2), 1.0), ((2, 1), 0.5), ((0.5, 0.5), 3.0)])
def test_boundaries_against_quadrature(ab, T):
    p = HawkesParams(*ab)
    assert find_theta_c(p, T).theta_c == pytest.approx(O.theta_c_mp(*ab, T), abs=1e-6)
    assert find_theta_d(p, T).theta_c == pytest.approx(O.theta_c_mp(*ab, T, "C"), abs=1e-6)


def test_boundary_is_verified_on_construction(critical):
    b = find_theta_d(critical, 1.0)
    with pytest.raises(ValueError):
        ExplosionBoundary(b.theta_c + 0.01, 1.0, 1e-9, critical, "C")
    with pytest.raises(ValueError):
        ExplosionBoundary(b.theta_c - 0.01, 1.0, 1e-9, critical, "C")


def test_blowup_time_against_mpmath():
    for ab in ((1, 1), (1, 2), (3, 0.5)):
        p = HawkesParams(*ab)
        for th in (0.5, 1.0, 2.0):
            ref = O.blowup_time_mp(*ab, th)
            got = blowup_time(p, "A", th)
            if math.isinf(ref):
                assert math.isinf(got)
            else:
                assert got == pytest.approx(ref, rel=1e-9)
    assert math.isinf(blowup_time(HawkesParams(1, 2), "A", 0.5))


def test_log_mgf_contract(subcritical):
    assert log_mgf_Z(subcritical, 2.0, 0.0, 1.0) == 0.0
    assert log_mgf_N(subcritical, 2.0, 0.0, 1.0) == 0.0
    tc = find_theta_c(subcritical, 1.0).theta_c
    td = find_theta_d(subcritical, 1.0).theta_c
    assert math.isinf(log_mgf_Z(subcritical, 1.0, tc + 1e-6, 1.0))
    assert math.isinf(log_mgf_N(subcritical, 1.0, td + 1e-6, 1.0))
    a = solve_A(subcritical, 0.3, 1.0).final
    b = solve_B(subcritical, 0.3, 1.0).final
    assert log_mgf_Z(subcritical, 2.0, 0.3, 1.0) == pytest.approx(2 * a + b, rel=1e-14)


def test_halving_tolerance_moves_endpoint_by_less_than_tol(critical):
    for tol in (1e-6, 1e-8, 1e-10):
        for th in (-2.0, 0.4):
            a = solve_A(critical, th, 2.0, tol).final
            b = solve_A(critical, th, 2.0, tol / 2).final
            assert abs(a - b) < tol


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 0.8), st.floats(-3, 0.8))
def test_flows_do_not_cross(t1, t2):
    p = HawkesParams(1.0, 1.0)
    lo, hi = sorted((t1, t2))
    if hi - lo < 1e-6:
        return
    assert z_cumulant(p, lo, 1.0).value < z_cumulant(p, hi, 1.0).value


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 0.5), st.floats(-3, 0.5))
def test_log_mgf_is_convex_in_theta(t1, t2):
    p = HawkesParams(1.0, 1.5, 0.5)
    f = lambda th: log_mgf_N(p, 2.0, th, 1.0)
    mid = f(0.5 * (t1 + t2))
    assert mid <= 0.5 * (f(t1) + f(t2)) + 1e-10


@pytest.mark.parametrize("ab", [(2.0, 1.0), (1.0, 1.0), (1.0, 3.0)])
def test_nonpositive_theta_never_explodes(ab):
    p = HawkesParams(*ab)
    for th in (-5.0, -0.5, 0.0):
        assert n_cumulant(p, th, 40.0).finite
        assert z_cumulant(p, th, 40.0).finite
