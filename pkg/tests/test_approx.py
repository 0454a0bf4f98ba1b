import math
import warnings

import mpmath as mp
import numpy as np
import pytest

from erlang_cbc import approx, exact
from erlang_cbc.model import balking, derive, reneging

mp.mp.dps = 50


def hazard_mp(x):
    x = mp.mpf(x)
    # survival through erfc keeps full precision in the far right tail
    return mp.npdf(x) / (mp.erfc(x / mp.sqrt(2)) / 2)


@pytest.mark.parametrize("x", [-45.0, -35.0, -10.0, -1.0, 0.0, 0.7, 5.0, 7.99, 8.01, 20.0, 1e3])
def test_log_hazard_against_mpmath(x):
    assert approx.log_hazard(x) == pytest.approx(float(mp.log(hazard_mp(x))), rel=1e-12, abs=1e-13)


@pytest.mark.parametrize("x", [-30.5, -5.0, 0.0, 3.0, 8.5, 40.0])
def test_hazard_against_mpmath(x):
    assert approx.hazard(x) == pytest.approx(float(hazard_mp(x)), rel=1e-12)


def test_hazard_vectorised_and_monotone():
    x = np.linspace(-20, 60, 4001)
    h = approx.hazard(x)
    assert h.shape == x.shape
    assert np.all(np.diff(h) > 0)
    # h(x) -> x for large x, and h(x) > x everywhere
    assert np.all(h > x)
    assert approx.hazard(1e4) == pytest.approx(1e4, rel=1e-7)


def test_poisson_helpers_against_mpmath():
    for s, R in [(3, 2.5), (40, 50.0), (120, 100.0)]:
        cdf = mp.fsum(mp.exp(-R) * mp.mpf(R) ** k / mp.factorial(k) for k in range(s + 1))
        assert approx.poisson_cdf(s, R) == pytest.approx(float(cdf), rel=1e-12)
        assert approx.poisson_pmf(s, R) == pytest.approx(float(mp.exp(-R) * mp.mpf(R) ** s / mp.factorial(s)),
                                                         rel=1e-12)


@pytest.mark.parametrize("R", [50.0, 500.0])
def test_normal_poisson_error_shrinks_with_load(R):
    s = np.arange(int(R - 3 * math.sqrt(R)), int(R + 3 * math.sqrt(R)))
    err = np.max(np.abs(approx.poisson_cdf_normal(s, R) - approx.poisson_cdf(s, R)))
    assert err < 0.07 / math.sqrt(R)


def test_ratio_forms_are_consistent():
    s, R = 45, 50.0
    up = approx.poisson_upper_ratio_normal(s, R)
    lo = approx.poisson_lower_ratio_normal(s, R)
    f, F = approx.poisson_pmf_normal(s, R), approx.poisson_cdf_normal(s, R)
    assert up == pytest.approx(f / (1 - F), rel=1e-12)
    assert lo == pytest.approx(f / F, rel=1e-12)


def test_wilson_hilferty_is_sharper_than_normal():
    for R in (10.0, 50.0, 200.0):
        s = np.arange(max(0, int(R - 3 * math.sqrt(R))), int(R + 3 * math.sqrt(R)))
        truth = approx.poisson_cdf(s, R)
        wh = np.max(np.abs(approx.wilson_hilferty_cdf(s, R) - truth))
        normal = np.max(np.abs(approx.poisson_cdf_normal(s, R) - truth))
        assert wh < 0.005 and wh < normal


def test_wilson_hilferty_pmf_is_cdf_increment():
    R = 30.0
    s = np.arange(10, 50)
    inc = approx.wilson_hilferty_cdf(s, R) - approx.wilson_hilferty_cdf(s - 1, R)
    np.testing.assert_allclose(approx.wilson_hilferty_pmf(s, R), inc, rtol=1e-12)


def test_inverse_blocking_normal_tracks_exact():
    params = reneging(400, 1, 380, 2.0, eps=0.1, tau=0.1)
    d = derive(params)
    x1 = approx.inv_blocking_normal("mmss", d)
    assert x1 == pytest.approx(exact.erlang_b_inverse_blocking(400, 380), rel=0.02)
    x2 = approx.inv_blocking_normal("reneging", d)
    truth = exact.reneging_inverse_blocking(params.lam_q, params.mu_q, params.s, params.theta)
    assert x2 == pytest.approx(truth, rel=0.02)
    with pytest.raises(ValueError):
        approx.inv_blocking_normal("balking", d)


@pytest.mark.parametrize("params", [
    reneging(500, 1, 490, 1.0),
    reneging(500, 1, 480, 5.0, eps=0.1, tau=0.1),
    balking(500, 1, 510, 2.0, eps=0.05),
    reneging(2000, 1, 1950, 0.5, eps=0.2),
])
def test_nonasymptotic_close_to_exact_at_scale(params):
    ex = exact.indicators_exact(params)
    na = approx.indicators_nonasymptotic(params)
    assert na.p_q == pytest.approx(ex.p_q, abs=0.01)
    assert na.p_ab == pytest.approx(ex.p_ab, abs=0.01)
    assert na.p_q == pytest.approx(na.pi_s + na.p_q_minus, rel=1e-13)


def test_real_staffing_agrees_at_integers_and_is_continuous():
    params = reneging(50, 1, 48, 1.0, eps=0.1)
    assert approx.nonasymptotic_at(params, 48.0) == approx.indicators_nonasymptotic(params)
    a = approx.nonasymptotic_at(params, 48.0 - 1e-7).p_q
    b = approx.nonasymptotic_at(params, 48.0 + 1e-7).p_q
    assert abs(a - b) < 1e-6 and a > b
    with pytest.raises(ValueError):
        approx.nonasymptotic_at(params, 0.0)


def test_balking_outside_regime_warns_and_clamps():
    with pytest.warns(approx.ApproximationQualityWarning):
        ind = approx.indicators_nonasymptotic(balking(0.5, 1, 10, 10))
    assert 0.0 <= ind.p_q <= 1.0 and 0.0 <= ind.p_ab <= 1.0 and ind.l_q >= 0.0


def test_reneging_and_balking_share_large_scale_limit():
    r = approx.indicators_nonasymptotic(reneging(2000, 1, 1980, 1.0, eps=0.1, tau=0.05))
    b = approx.indicators_nonasymptotic(balking(2000, 1, 1980, 1.0, eps=0.1, tau=0.05))
    assert r.p_q == pytest.approx(b.p_q, abs=0.01)


def test_wilson_hilferty_indicators_close_to_exact():
    for params in (reneging(20, 1, 18, 1.0), balking(30, 1, 28, 0.5, eps=0.2), reneging(10, 1, 9, 0.5, tau=0.3)):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", approx.ApproximationQualityWarning)
            wh = approx.indicators_wilson_hilferty(params)
        assert wh.p_q == pytest.approx(exact.indicators_exact(params).p_q, abs=0.01)


def test_no_congested_arrivals_approximations():
    params = reneging(50, 1, 45, 1.0, eps=1.0)
    ind = approx.indicators_nonasymptotic(params)
    assert ind.p_q_minus == 0.0 and ind.p_q == ind.pi_s
