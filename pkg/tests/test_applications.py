import io
import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

import oracles as O
from hawkes_ldp import (ClaimKind, ClaimModel, HawkesParams, QueueBranch, RuinRegime, RuinSpec,
                        claim_conjugate, lln_ruin_time, mc_ruin_probability,
                        queue_loss_exponent, rate_H, ruin_exponent)
from hawkes_ldp.applications import (lln_window_max, ruin_sweep_T, window_rate,
                                     window_rate_primal, write_sweep)

POISSON = ClaimModel("poisson", 1.0)


def scalar_conjugate(model, v):
    res = minimize_scalar(lambda th: -(th * v - model.log_mgf(th)),
                          bounds=(-30, min(30, model.theta_plus - 1e-9)), method="bounded",
                          options={"xatol": 1e-12})
    return -res.fun


@pytest.mark.parametrize("model,v", [(ClaimModel("exponential", 1.0), 2.0),
                                     (ClaimModel("exponential", 2.0), 0.7),
                                     (POISSON, 2.5), (ClaimModel("poisson", 3.0), 0.4)])
def test_claim_conjugates_against_scalar_max(model, v):
    assert claim_conjugate(model, v) == pytest.approx(scalar_conjugate(model, v), abs=1e-8)


def test_claim_conjugate_closed_forms():
    assert claim_conjugate(ClaimModel("exponential", 1.0), 2.0) == pytest.approx(1 - math.log(2))
    assert claim_conjugate(POISSON, 0.0) == 1.0
    det = ClaimModel("deterministic", 2.0)
    assert claim_conjugate(det, 2.0) == 0.0 and math.isinf(claim_conjugate(det, 2.1))
    assert math.isinf(claim_conjugate(POISSON, -1.0))
    assert ClaimModel("exponential", 0.5).theta_plus == 2.0
    assert math.isinf(ClaimModel("exponential", 0.5).log_mgf(2.0))
    with pytest.raises(ValueError):
        ClaimModel("poisson", 0.0)
    with pytest.raises(ValueError):
        ClaimModel("gamma", 1.0)


def test_lln_ruin_time():
    assert lln_ruin_time(HawkesParams(1, 1), POISSON, 0.5) == 0.5
    assert math.isinf(lln_ruin_time(HawkesParams(1, 2), POISSON, 1.5))
    assert lln_ruin_time(HawkesParams(2, 1), POISSON, 0.5) == pytest.approx(math.log(1.5))


def test_ruin_against_y_grid_oracle(critical):
    ref, y_ref = O.ruin_oracle(1.0, 1.0, 0.5, 0.2, O.poisson_conjugate)
    res = ruin_exponent(critical, RuinSpec(0.5, 0.2, POISSON))
    assert res.value == pytest.approx(ref, abs=1e-3)
    assert res.y_star == pytest.approx(y_ref, abs=2e-3)
    assert res.regime is RuinRegime.LARGE_DEVIATION


def test_ruin_monotone_in_T_and_vanishes_at_lln_time(critical):
    Ts = [0.1, 0.2, 0.3, 0.4, 0.45, 0.49]
    vals = [v for _, v in ruin_sweep_T(critical, POISSON, 0.5, Ts)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 0.05 * vals[0]
    res = ruin_exponent(critical, RuinSpec(0.5, 0.5, POISSON))
    assert res.value == 0.0 and res.regime is RuinRegime.LLN_RUIN and res.y_star is None


def test_ruin_increasing_in_surplus(critical):
    vals = [ruin_exponent(critical, RuinSpec(x, 0.2, POISSON)).value for x in (0.3, 0.5, 0.8)]
    assert 0 < vals[0] < vals[1] < vals[2]


def test_deterministic_claims_reduce_to_H(critical):
    det = ClaimModel("deterministic", 2.0)
    res = ruin_exponent(critical, RuinSpec(1.0, 0.2, det))
    assert res.value == pytest.approx(rate_H(critical, 0.5, 0.2).value, rel=1e-12)


def test_exponential_claims_against_brute_force_grid(critical):
    model = ClaimModel("exponential", 1.0)
    x, T = 0.5, 0.2
    H = O.H_table(1.0, 1.0, T, np.arange(-20.0, 30.0, 1e-3))
    ys = np.arange(1e-3, 20 * x, 2e-3)
    hy = H(ys)
    best = math.inf
    for z in np.arange(0.0, x + 1e-12, 2e-3):
        w = np.maximum((x - z) / ys, 1.0)
        conj = w - 1.0 - np.log(w)
        best = min(best, float(np.min(hy + ys * conj)) + z)
    res = ruin_exponent(critical, RuinSpec(x, T, model))
    assert res.value == pytest.approx(best, abs=1e-3)
    assert res.value <= x + 1e-12     # one claim can eat the whole surplus at cost theta_plus x


def test_heavier_claims_ruin_more_easily(critical):
    light = ruin_exponent(critical, RuinSpec(0.5, 0.2, POISSON)).value
    heavy = ruin_exponent(critical, RuinSpec(0.5, 0.2, ClaimModel("exponential", 1.0))).value
    assert heavy < light


def test_ruin_spec_validation():
    with pytest.raises(ValueError):
        RuinSpec(0.0, 1.0, POISSON)
    with pytest.raises(ValueError):
        RuinSpec(1.0, math.inf, POISSON)


def test_mc_ruin_extremes(critical):
    # surplus 0.05 n is ruined almost surely, 3 n essentially never
    sure = mc_ruin_probability(critical, RuinSpec(0.05, 1.0, POISSON), 50, trials=2000)
    never = mc_ruin_probability(critical, RuinSpec(3.0, 0.2, POISSON), 50, trials=2000)
    assert sure.estimate > 0.99 and never.estimate == 0.0
    again = mc_ruin_probability(critical, RuinSpec(0.05, 1.0, POISSON), 50, trials=2000)
    assert again == sure


def test_mc_ruin_decays_with_n(critical):
    spec = RuinSpec(0.5, 0.3, POISSON)
    p = [mc_ruin_probability(critical, spec, n, trials=20_000).estimate for n in (10, 40)]
    assert p[1] < p[0]


def test_queue_degenerate_below_lln_window(critical):
    assert lln_window_max(critical, 5.0, 1.0) == pytest.approx(1.0)
    for x in (0.5, 1.0):
        res = queue_loss_exponent(critical, x, 5.0, 1.0)
        assert res.value == 0.0 and res.degenerate and res.branch is QueueBranch.DEGENERATE


def test_queue_against_brute_force_oracle(critical):
    ref, s_ref, y_ref = O.queue_oracle(1.0, 1.0, 5.0, 5.0, 1.0)
    res = queue_loss_exponent(critical, 5.0, 5.0, 1.0)
    assert res.value == pytest.approx(ref, abs=1e-3)
    assert res.s_star == pytest.approx(s_ref, abs=0.02)
    assert res.y_star == pytest.approx(y_ref, abs=5e-3)


def test_queue_nonincreasing_in_T_and_bounded_by_first_window(critical):
    vals = [queue_loss_exponent(critical, 5.0, T, 1.0).value for T in (1.0, 2.0, 3.0, 4.0, 5.0)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    assert vals[0] == pytest.approx(rate_H(critical, 5.0, 1.0).value, rel=1e-12)
    for T, v in zip((1.0, 2.0, 3.0, 4.0, 5.0), vals):
        assert v <= rate_H(critical, 5.0, min(T, 1.0)).value + 1e-12


def test_queue_short_horizon_is_the_first_window(critical):
    res = queue_loss_exponent(critical, 2.0, 0.5, 1.0)
    assert res.branch is QueueBranch.FIRST_WINDOW
    assert res.value == pytest.approx(rate_H(critical, 2.0, 0.5).value, rel=1e-12)


@pytest.mark.parametrize("s", [1.5, 3.0, 5.0])
def test_window_rate_dual_primal_golden_agree(critical, s):
    dual, yd = window_rate(critical, 5.0, s, 1.0)
    primal, yp = window_rate_primal(critical, 5.0, s, 1.0)
    golden, yg = window_rate_primal(critical, 5.0, s, 1.0, golden=True)
    assert primal == pytest.approx(dual, abs=1e-9)
    assert golden == pytest.approx(dual, abs=1e-9)
    assert yp == pytest.approx(yd, rel=1e-5) and yg == pytest.approx(yd, rel=1e-4)


def test_queue_methods_agree(critical):
    a = queue_loss_exponent(critical, 4.0, 3.0, 1.0, method="primal").value
    b = queue_loss_exponent(critical, 4.0, 3.0, 1.0, method="dual").value
    assert a == pytest.approx(b, abs=1e-9)


def test_queue_validation(critical):
    for bad in ((0.0, 1.0, 1.0), (1.0, -1.0, 1.0), (1.0, 1.0, math.nan)):
        with pytest.raises(ValueError):
            queue_loss_exponent(critical, *bad)


def test_sweep_csv():
    buf = io.StringIO()
    write_sweep(buf, ("T", "I_tau"), [(0.1, 0.5), (0.5, 0.0)])
    assert buf.getvalue() == "T,I_tau\n0.1,0.5\n0.5,0\n"
