"""Exact steady-state analysis of the modified Erlang A model.

The chain is split at state ``s`` into an M/M/s/s sub-chain (states 0..s)
and a congested sub-chain (states s, s+1, ...).  All indicators follow from
the two inverse blocking probabilities ``x1 = 1/pi_s^1`` and
``x2 = 1/pi_s^2``.  Internally we carry the *excesses* ``x - 1`` in log
space: they can overflow a double (``x1`` grows like ``e^R`` for ``s >> R``)
and computing ``x - 1`` by subtraction loses everything when blocking is
close to one.

:func:`full_chain_distribution` solves the undecomposed birth-death chain
directly and is used as the independent oracle in the test-suite.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, fields

import numpy as np
from scipy import integrate
from scipy.special import logsumexp

from .model import DegenerateScaleError, ModelParams, check

NEG_INF = -math.inf
DEFAULT_SERIES_TOL = 1e-16
DEFAULT_STATE_CAP = 10**7


class TruncationOverflowError(RuntimeError):
    """The state space had to grow beyond the cap before the tail tolerance was met."""


class QuadratureError(RuntimeError):
    def __init__(self, message: str, bound: float):
        self.bound = bound
        super().__init__(f"{message} (achieved error bound {bound:.3g})")


class HeavyTrafficWarning(UserWarning):
    pass


@dataclass(frozen=True)
class PerformanceIndicators:
    """Quality-of-service indicators; engines that only produce a subset leave the rest ``None``."""

    pi_s: float | None = None
    p_block: float | None = None
    pi_s2: float | None = None
    p_q: float | None = None
    p_q_minus: float | None = None
    p_ab: float | None = None
    l_q: float | None = None
    w_q: float | None = None
    lambda_eff: float | None = None
    throughput: float | None = None

    def as_dict(self) -> dict[str, float | None]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


INDICATOR_FIELDS = tuple(f.name for f in fields(PerformanceIndicators))


# --------------------------------------------------------------------------
# sub-chain inverse blocking probabilities


def _log1pexp(x: float) -> float:
    return float(np.logaddexp(0.0, x))


def erlang_b_log_excess(R: float, s: int) -> float:
    """``log(1/B(s, R) - 1)`` for the Erlang loss system; ``-inf`` when ``s == 0``.

    Runs the reciprocal form of the blocking recursion,
    ``1/B(k) = 1 + (k/R) / B(k-1)``, and switches to log space once the
    value gets near the top of the double range.
    """
    if not R > 0:
        raise ValueError("R must be positive")
    if s < 0:
        raise ValueError("s must be non-negative")
    excess = 0.0
    k = 1
    while k <= s:
        excess = (k / R) * (1.0 + excess)
        k += 1
        if excess > 1e290:
            break
    if k > s:
        return math.log(excess) if excess > 0 else NEG_INF
    log_excess = math.log(excess)
    log_R = math.log(R)
    while k <= s:
        log_excess = math.log(k) - log_R + _log1pexp(log_excess)
        k += 1
    return log_excess


def erlang_b_inverse_blocking(R: float, s: int) -> float:
    """``1/pi_s^1 = F_P(s;R)/f_P(s;R)``, the inverse Erlang B blocking probability.

    Uses the stable recursion ``B(0) = 1``, ``B(k) = R B(k-1) / (k + R B(k-1))``
    in its reciprocal form.  May return ``inf`` when the true value exceeds
    the double range.
    """
    return math.exp(_log1pexp(erlang_b_log_excess(R, s)))


@dataclass(frozen=True)
class SeriesSum:
    """Log of ``sum_{k>=1} t_k`` and of ``sum_{k>=1} k t_k`` plus a relative bound on the dropped tail."""

    log_total: float
    log_first_moment: float
    n_terms: int
    tail_bound: float

    @property
    def inverse_blocking(self) -> float:
        return math.exp(_log1pexp(self.log_total))


def _product_series(ratio, tol: float, last: int | None = None,
                    cap: int = DEFAULT_STATE_CAP) -> SeriesSum:
    """Sum ``t_k = prod_{i<=k} ratio(i)`` for ``k = 1..last`` (or until convergence).

    ``ratio`` must be vectorised and non-increasing in ``i``.  Infinite
    series stop once the current ratio is below one and the geometric tail
    bound ``t_K r / (1 - r)`` (and its first-moment analogue) falls below
    ``tol`` times the partial sums.
    """
    log_t_prev = 0.0
    start = 1
    chunk = 1024
    log_parts, log_moment_parts = [], []
    tail = 0.0
    while True:
        stop = start + chunk if last is None else min(start + chunk, last + 1)
        i = np.arange(start, stop, dtype=float)
        with np.errstate(divide="ignore"):
            log_r = np.log(ratio(i))
        log_t = log_t_prev + np.cumsum(log_r)
        log_parts.append(logsumexp(log_t))
        log_moment_parts.append(logsumexp(log_t + np.log(i)))
        log_t_prev = float(log_t[-1])
        n = stop - 1
        if last is not None and n >= last:
            break
        if log_t_prev == NEG_INF:
            break
        r_next = float(ratio(np.array([n + 1.0]))[0])
        if r_next < 1.0:
            log_total = logsumexp(log_parts)
            log_moment = logsumexp(log_moment_parts)
            geo = r_next / (1.0 - r_next)
            tail = math.exp(log_t_prev - log_total) * geo
            tail_moment = math.exp(log_t_prev - log_moment) * (n * geo + geo / (1.0 - r_next))
            if tail < tol and tail_moment < tol:
                break
        if n >= cap:
            raise TruncationOverflowError(f"series did not converge within {cap} terms")
        start = stop
        chunk = min(chunk * 2, 1 << 20)
    return SeriesSum(float(logsumexp(log_parts)), float(logsumexp(log_moment_parts)), n, tail)


def reneging_series(lam_q: float, mu_q: float, s: int, gamma: float,
                    tol: float = DEFAULT_SERIES_TOL) -> SeriesSum:
    """Terms ``t_k = prod_{i=1..k} lam_q / (s mu_q + i gamma)`` of the reneging sub-chain."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    if mu_q < 0 or lam_q < 0:
        raise ValueError("rates must be non-negative")
    if lam_q == 0:
        return SeriesSum(NEG_INF, NEG_INF, 0, 0.0)
    base = s * mu_q
    return _product_series(lambda i: lam_q / (base + i * gamma), tol)


def reneging_inverse_blocking(lam_q: float, mu_q: float, s: int, gamma: float,
                              tol: float = DEFAULT_SERIES_TOL) -> float:
    """``1/pi_s^2 = sum_{k>=0} prod_{i=1..k} lam_q / (s mu_q + i gamma)`` by term-wise summation."""
    return reneging_series(lam_q, mu_q, s, gamma, tol).inverse_blocking


def balking_series(lam_q: float, mu_q: float, s: int, delta: float) -> SeriesSum:
    """Terms ``t_k = prod_{i=0..k-1} (lam_q - delta i)^+ / (s mu_q)`` of the balking sub-chain.

    The chain tops out at ``s + u + 1`` with ``u = floor(lam_q/delta)``, so
    the sum is finite; it is still cut short once the remaining terms are
    below double resolution.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    service = s * mu_q
    if not service > 0:
        raise DegenerateScaleError("balking sub-chain has no service capacity (s * mu_q == 0)")
    if lam_q == 0:
        return SeriesSum(NEG_INF, NEG_INF, 0, 0.0)
    u = math.floor(lam_q / delta)
    return _product_series(
        lambda i: np.maximum(lam_q - delta * (i - 1.0), 0.0) / service,
        tol=DEFAULT_SERIES_TOL, last=u + 1)


def balking_inverse_blocking(lam_q: float, mu_q: float, s: int, delta: float) -> float:
    """``1/pi_s^2`` of the balking sub-chain, an exact finite sum."""
    return balking_series(lam_q, mu_q, s, delta).inverse_blocking


def reneging_inverse_blocking_integral(lam_q: float, mu_q: float, s: int, gamma: float,
                                       rtol: float = 1e-12) -> float:
    """``(s mu_q/gamma) * int_0^1 exp(lam_q t/gamma) (1-t)^(s mu_q/gamma - 1) dt``.

    Independent cross-check of :func:`reneging_inverse_blocking`.  When the
    exponent ``b = s mu_q/gamma`` is below one the integrand is singular at
    ``t = 1``; substituting ``u = (1-t)^b`` turns the whole expression into
    ``int_0^1 exp(R'(1 - u^(1/b))) du`` with ``R' = lam_q/gamma``, which is
    smooth.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    b = s * mu_q / gamma
    if not b > 0:
        raise ValueError("s * mu_q must be positive")
    r = lam_q / gamma
    if r == 0:
        return 1.0
    opts = dict(epsabs=0.0, epsrel=rtol, limit=500)
    if b < 1.0:
        # b * int ... = e^r * int_0^1 exp(-r u^(1/b)) du
        val, err = integrate.quad(lambda u: math.exp(-r * u ** (1.0 / b)), 0.0, 1.0, **opts)
        log_scale = r
    else:
        # integrand exp(r t + (b-1) log(1-t)) peaks at t* = 1 - (b-1)/r
        t_peak = min(max(1.0 - (b - 1.0) / r, 0.0), 1.0)
        log_scale = r * t_peak + ((b - 1.0) * math.log1p(-t_peak) if t_peak < 1.0 else 0.0)

        def f(t):
            if t >= 1.0:
                return 0.0 if b > 1.0 else math.exp(r - log_scale)
            return math.exp(r * t + (b - 1.0) * math.log1p(-t) - log_scale)

        points = [t_peak] if 0.0 < t_peak < 1.0 else None
        val, err = integrate.quad(f, 0.0, 1.0, points=points, **opts)
        val *= b
        err *= b
    if not (val > 0 and err <= 1e-9 * val):
        raise QuadratureError("reneging integral did not converge", err / val if val > 0 else math.inf)
    return math.exp(log_scale + math.log(val))


# --------------------------------------------------------------------------
# full-chain oracle


@dataclass(frozen=True)
class StationaryDistribution:
    probs: np.ndarray
    truncation_k: int
    tail_mass_bound: float


def birth_death_rates(params: ModelParams, k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Total admission rate ``lambda_k`` and departure rate ``mu_k`` at states ``k``."""
    k = np.asarray(k, dtype=float)
    s = params.s
    busy = k >= s
    queued = np.maximum(k - s, 0.0)
    if params.is_reneging:
        lam_k = np.where(busy, params.lam_q, params.lam)
        mu_k = np.where(k <= s, k * params.mu, s * params.mu_q + queued * params.theta)
    else:
        lam_k = np.where(busy, np.maximum(params.lam_q - params.theta * queued, 0.0), params.lam)
        mu_k = np.where(k <= s, k * params.mu, s * params.mu_q)
    return lam_k, mu_k


def full_chain_distribution(params: ModelParams, tol: float = 1e-12,
                            cap: int = DEFAULT_STATE_CAP) -> StationaryDistribution:
    """Stationary distribution of the whole birth-death chain by detailed balance from state 0.

    Reneging chains are truncated once the geometric bound on the neglected
    mass drops below ``tol``; balking chains stop at their natural top state.
    """
    check(params)
    s = params.s
    if not params.is_reneging and s == 0:
        raise DegenerateScaleError("balking chain with s == 0 has no departures")
    if params.is_reneging:
        top = None
    else:
        u = math.floor(params.lam_q / params.theta)
        top = s + u + 1 if params.lam_q - params.theta * u > 0 else s + u
    if params.lam_q == 0:
        top = s

    log_w = [np.zeros(1)]
    last = 0.0
    n = 0
    chunk = max(1024, 2 * s + 2)
    tail = 0.0
    while True:
        hi = chunk + n if top is None else min(n + chunk, top)
        k = np.arange(n + 1, hi + 1, dtype=float)
        lam_prev, _ = birth_death_rates(params, k - 1)
        _, mu_k = birth_death_rates(params, k)
        with np.errstate(divide="ignore"):
            steps = np.log(lam_prev) - np.log(mu_k)
        block = last + np.cumsum(steps)
        log_w.append(block)
        n = hi
        last = float(block[-1]) if block.size else last
        if top is not None and n >= top:
            break
        if last == NEG_INF:
            break
        if n > s:
            lam_n, _ = birth_death_rates(params, np.array([n]))
            _, mu_next = birth_death_rates(params, np.array([n + 1]))
            r = float(lam_n[0] / mu_next[0])
            if r < 1.0:
                log_total = logsumexp(np.concatenate(log_w))
                tail = math.exp(last - log_total) * r / (1.0 - r)
                if tail < tol:
                    break
        if n >= cap:
            raise TruncationOverflowError(f"no convergence within {cap} states")
        chunk = min(chunk * 2, 1 << 20)
    log_w = np.concatenate(log_w)
    probs = np.exp(log_w - logsumexp(log_w))
    return StationaryDistribution(probs, n, tail)


def indicators_from_distribution(params: ModelParams, dist: StationaryDistribution) -> PerformanceIndicators:
    """Indicators read directly off a full-chain distribution (no decomposition)."""
    pi = dist.probs
    k = np.arange(pi.size, dtype=float)
    s = params.s
    lam_k, _ = birth_death_rates(params, k)
    queued = np.maximum(k - s, 0.0)
    pi_s = float(pi[s])
    p_q = float(pi[s:].sum())
    l_q = float((queued * pi).sum())
    lost = float(((params.lam - lam_k) * pi).sum())
    if params.is_reneging:
        lost += params.theta * l_q
    p_ab = lost / params.lam
    lam_eff = params.lam * (1 - params.cbc.eps * p_q) if params.is_reneging else params.lam * (1 - p_ab)
    return PerformanceIndicators(
        pi_s=pi_s,
        p_block=pi_s / float(pi[: s + 1].sum()),
        pi_s2=pi_s / p_q,
        p_q=p_q,
        p_q_minus=p_q - pi_s,
        p_ab=p_ab,
        l_q=l_q,
        w_q=l_q / lam_eff if lam_eff > 0 else math.nan,
        lambda_eff=lam_eff,
        throughput=params.lam * (1 - p_ab),
    )


# --------------------------------------------------------------------------
# assembly


def assemble(params: ModelParams, log_x1: float, log_b: float, *,
             negative_b: bool = False, l_q: float | None = None) -> PerformanceIndicators:
    """Indicators from ``x1 = 1/pi_s^1`` and ``b = 1/pi_s^2 - 1`` given as logs.

    ``negative_b`` marks an approximation that produced ``b < 0`` (only the
    normal balking representation can).  ``l_q`` overrides the
    flow-balance queue length.
    """
    eps, theta, lam = params.cbc.eps, params.theta, params.lam
    p = params.p
    if not negative_b:
        log_d = float(np.logaddexp(log_x1, log_b))
        pi_s = math.exp(-log_d)
        p_q_minus = math.exp(log_b - log_d)
        pi_s2 = math.exp(-_log1pexp(log_b))
    else:
        b = -math.exp(log_b)
        d = math.exp(log_x1) + b
        pi_s = 1.0 / d if d > 0 else math.inf
        p_q_minus = b / d if d > 0 else -math.inf
        pi_s2 = 1.0 / (1.0 + b) if b > -1.0 else math.inf
    p_block = math.exp(-log_x1)
    p_q = pi_s + p_q_minus
    p_ab = pi_s + p * p_q_minus
    if l_q is None:
        l_q = (lam / theta) * ((1 - eps) * pi_s + (p - eps) * p_q_minus)
    if params.is_reneging:
        lam_eff = lam * (1 - eps * p_q)
    else:
        lam_eff = lam * (1 - p_ab)
    return PerformanceIndicators(
        pi_s=pi_s,
        p_block=p_block,
        pi_s2=pi_s2,
        p_q=p_q,
        p_q_minus=p_q_minus,
        p_ab=p_ab,
        l_q=l_q,
        w_q=l_q / lam_eff if lam_eff > 0 else math.nan,
        lambda_eff=lam_eff,
        throughput=lam * (1 - p_ab),
    )


def indicators_exact(params: ModelParams) -> PerformanceIndicators:
    """Exact indicators via the decomposition identities.

    Reneging uses the flow-balance queue length; balking sums ``k pi_{s+k}``
    directly because the flow-balance form overstates the outflow at the
    top state when ``lam_q/delta`` is not an integer.
    """
    check(params)
    R = params.offered_load
    log_x1 = _log1pexp(erlang_b_log_excess(R, params.s))
    if params.is_reneging:
        series = reneging_series(params.lam_q, params.mu_q, params.s, params.theta)
        return assemble(params, log_x1, series.log_total)
    series = balking_series(params.lam_q, params.mu_q, params.s, params.theta)
    log_d = float(np.logaddexp(log_x1, series.log_total))
    l_q = math.exp(series.log_first_moment - log_d)
    return assemble(params, log_x1, series.log_total, l_q=l_q)


# --------------------------------------------------------------------------
# special cases


def erlang_c_delay(p_block: float, rho: float) -> float:
    """Delay probability ``P_block / (1 - rho + rho P_block)`` when the queue is an M/M/1 with load ``rho``."""
    if not 0.0 <= p_block <= 1.0:
        raise ValueError("p_block must lie in [0, 1]")
    if not 0.0 <= rho < 1.0:
        raise ValueError("rho must lie in [0, 1)")
    return p_block / (1.0 - rho + rho * p_block)


def heavy_traffic(params: ModelParams) -> PerformanceIndicators:
    """Heavy-traffic approximation: ``P_Q ~ 1``, ``P_ab ~ p``, ``L_Q ~ (lam_q - s mu_q)/theta``."""
    check(params)
    p = params.p
    if p <= 0:
        warnings.warn(f"heavy-traffic approximation used with p = {p:.4g} <= 0",
                      HeavyTrafficWarning, stacklevel=2)
    return PerformanceIndicators(
        p_q=1.0,
        p_ab=p,
        l_q=(params.lam_q - params.s * params.mu_q) / params.theta,
    )


class TradeOff(str, enum.Enum):
    TRADE_OFF = "TradeOff"
    WIN_WIN = "WinWin"
    INDEPENDENT = "Independent"


def tradeoff_direction(params: ModelParams) -> TradeOff:
    """How ``P_ab`` responds to stronger abandonment, from the sign of ``p - P_block``.

    ``TRADE_OFF``: P_ab rises while P_Q falls.  ``WIN_WIN``: both fall.
    """
    check(params)
    p_block = 1.0 / erlang_b_inverse_blocking(params.offered_load, params.s)
    gap = params.p - p_block
    if abs(gap) < 1e-12:
        return TradeOff.INDEPENDENT
    return TradeOff.TRADE_OFF if gap < 0 else TradeOff.WIN_WIN
