"""Exact engine against independent oracles: mpmath sums, the whole chain, and closed special cases."""
import math
import warnings

import mpmath as mp
import numpy as np
import pytest

from erlang_cbc import exact
from erlang_cbc.model import balking, reneging

from helpers import random_configs

mp.mp.dps = 40


def erlang_b_mp(R, s):
    R = mp.mpf(R)
    terms = [R**k / mp.factorial(k) for k in range(s + 1)]
    return terms[-1] / mp.fsum(terms)


def reneging_inv_mp(lam_q, mu_q, s, gamma, n=4000):
    total, t = mp.mpf(1), mp.mpf(1)
    for i in range(1, n):
        t *= mp.mpf(lam_q) / (s * mp.mpf(mu_q) + i * mp.mpf(gamma))
        total += t
        if t < total * mp.mpf(10) ** -30:
            break
    return total


def balking_inv_mp(lam_q, mu_q, s, delta):
    total, t, i = mp.mpf(1), mp.mpf(1), 0
    while True:
        rate = mp.mpf(lam_q) - mp.mpf(delta) * i
        if rate <= 0:
            break
        t *= rate / (s * mp.mpf(mu_q))
        total += t
        i += 1
    return total


@pytest.mark.parametrize("R,s", [(0.5, 1), (5.0, 3), (50.0, 40), (50.0, 80), (1000.0, 10), (3000.0, 3100)])
def test_erlang_b_matches_mpmath(R, s):
    assert exact.erlang_b_inverse_blocking(R, s) == pytest.approx(float(1 / erlang_b_mp(R, s)), rel=1e-12)


def test_erlang_b_zero_servers_blocks_everything():
    assert exact.erlang_b_inverse_blocking(3.0, 0) == pytest.approx(1.0)


@pytest.mark.parametrize("args", [(8.0, 1.0, 5, 0.3), (50.0, 1.0, 40, 10.0), (200.0, 1.1, 180, 0.05)])
def test_reneging_series_matches_mpmath(args):
    assert exact.reneging_inverse_blocking(*args) == pytest.approx(float(reneging_inv_mp(*args)), rel=1e-11)


@pytest.mark.parametrize("args", [(8.0, 1.0, 5, 0.3), (50.0, 1.0, 40, 10.0), (40.0, 1.2, 30, 7.0), (12.0, 1.0, 3, 4.0)])
def test_balking_series_matches_mpmath(args):
    assert exact.balking_inverse_blocking(*args) == pytest.approx(float(balking_inv_mp(*args)), rel=1e-12)


@pytest.mark.parametrize("args", [(8.0, 1.0, 5, 0.3), (50.0, 1.0, 40, 10.0), (5.0, 0.2, 2, 3.0), (30.0, 1.0, 1, 0.5)])
def test_reneging_integral_agrees_with_series(args):
    series = exact.reneging_inverse_blocking(*args)
    assert exact.reneging_inverse_blocking_integral(*args) == pytest.approx(series, rel=1e-9)


def test_balking_first_moment():
    lam_q, mu_q, s, delta = 9.5, 1.0, 4, 2.0
    ser = exact.balking_series(lam_q, mu_q, s, delta)
    t, k, tot, mom = 1.0, 0, 0.0, 0.0
    while lam_q - delta * k > 0:
        t *= (lam_q - delta * k) / (s * mu_q)
        k += 1
        tot += t
        mom += k * t
    assert math.exp(ser.log_total) == pytest.approx(tot, rel=1e-13)
    assert math.exp(ser.log_first_moment) == pytest.approx(mom, rel=1e-13)


@pytest.mark.parametrize("params", [
    reneging(50, 1, 45, 1.0),
    reneging(50, 1, 45, 1.0, eps=0.2, tau=0.2),
    reneging(10, 2, 3, 0.1, eps=0.5),
    balking(50, 1, 45, 2.0, eps=0.1, tau=0.05),
    balking(7.5, 1, 2, 2.0),
])
def test_decomposition_matches_whole_chain(params):
    dec = exact.indicators_exact(params)
    full = exact.indicators_from_distribution(params, exact.full_chain_distribution(params, tol=1e-15))
    for name in exact.INDICATOR_FIELDS:
        assert getattr(dec, name) == pytest.approx(getattr(full, name), rel=1e-9, abs=1e-14), name


def test_decomposition_identities_random():
    for params in random_configs(40, seed=7):
        ind = exact.indicators_exact(params)
        assert ind.p_q == pytest.approx(ind.pi_s + ind.p_q_minus, rel=1e-13)
        assert ind.p_ab == pytest.approx(ind.pi_s + params.p * ind.p_q_minus, rel=1e-10, abs=1e-15)
        assert 0.0 <= ind.p_q <= 1.0 and 0.0 <= ind.p_ab <= 1.0
        # little's law on the admitted stream
        assert ind.w_q * ind.lambda_eff == pytest.approx(ind.l_q, rel=1e-12)


def test_reneging_queue_length_flow_balance():
    # losses = eps lam P_Q + gamma L_Q must equal lam P_ab
    params = reneging(40, 1, 35, 0.7, eps=0.15, tau=0.1)
    ind = exact.indicators_exact(params)
    lost = params.cbc.eps * params.lam * ind.p_q + params.theta * ind.l_q
    assert lost == pytest.approx(params.lam * ind.p_ab, rel=1e-12)


def test_no_congestion_arrivals():
    params = reneging(20, 1, 15, 1.0, eps=1.0)
    ind = exact.indicators_exact(params)
    assert ind.p_q_minus == 0.0
    assert ind.p_q == pytest.approx(float(erlang_b_mp(20, 15)), rel=1e-12)


def test_erlang_c_delay_against_closed_form():
    R, s = 8.0, 10
    b = float(erlang_b_mp(R, s))
    rho = R / s
    head = sum(R**k / math.factorial(k) for k in range(s))
    tail = R**s / math.factorial(s) / (1 - rho)
    assert exact.erlang_c_delay(b, rho) == pytest.approx(tail / (head + tail), rel=1e-12)
    with pytest.raises(ValueError):
        exact.erlang_c_delay(0.5, 1.0)


def test_small_reneging_rate_approaches_erlang_c():
    params = reneging(8, 1, 10, 1e-5)
    rho = 0.8
    expected = exact.erlang_c_delay(float(erlang_b_mp(8, 10)), rho)
    assert exact.indicators_exact(params).p_q == pytest.approx(expected, rel=1e-3)


def test_heavy_traffic_limit():
    params = reneging(1000, 1, 900, 0.5)
    ht = exact.heavy_traffic(params)
    ex = exact.indicators_exact(params)
    assert ht.p_q == 1.0 and ht.p_ab == pytest.approx(0.1)
    assert ex.p_ab == pytest.approx(ht.p_ab, abs=2e-3)
    assert ex.l_q == pytest.approx(ht.l_q, rel=1e-2)
    with pytest.warns(exact.HeavyTrafficWarning):
        exact.heavy_traffic(reneging(10, 1, 20, 1.0))


def test_tradeoff_direction_against_numerical_derivative():
    # sign of dP_ab/dgamma should agree with the classifier away from the boundary
    cases = [reneging(20, 1, 18, 1.0), reneging(100, 1, 95, 1.0, eps=0.6, tau=-0.5),
             reneging(100, 1, 60, 1.0, eps=0.9, tau=-0.5)]
    for params in cases:
        label = exact.tradeoff_direction(params)
        lo = exact.indicators_exact(params.replace(gamma=params.theta * 0.9)).p_ab
        hi = exact.indicators_exact(params.replace(gamma=params.theta * 1.1)).p_ab
        assert label is (exact.TradeOff.TRADE_OFF if hi > lo else exact.TradeOff.WIN_WIN)
    # without control P_block > 1 - s/R always, so never win-win, even deep in overload
    assert exact.tradeoff_direction(reneging(1000, 1, 10, 1.0)) is exact.TradeOff.TRADE_OFF


def test_abandonment_identity_behind_tradeoff():
    # P_ab = p + pi_s (P_block - p) / P_block, so the sign of P_block - p fixes the direction
    for params in random_configs(20, seed=11, kind="reneging"):
        ind = exact.indicators_exact(params)
        rhs = params.p + ind.pi_s * (ind.p_block - params.p) / ind.p_block
        assert ind.p_ab == pytest.approx(rhs, rel=1e-10, abs=1e-14)


def test_truncation_cap():
    with pytest.raises(exact.TruncationOverflowError):
        exact.full_chain_distribution(reneging(1e6, 1, 10, 1e-3), cap=2000)


def test_extreme_parameters_stay_finite():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        for params in (reneging(1e5, 1, 50_000, 1e3), reneging(1e4, 1, 12_000, 1e-3), balking(1e4, 1, 9_000, 1e-2)):
            ind = exact.indicators_exact(params)
            assert all(np.isfinite(v) for v in (ind.p_q, ind.p_ab, ind.l_q))
