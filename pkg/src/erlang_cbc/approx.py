"""Poisson/normal special functions and the non-asymptotic normal representation.

Each sub-chain's inverse blocking probability is a ratio of a Poisson CDF
and PMF.  Replacing the Poisson by a normal with continuity correction
``0.5/sqrt(R)`` turns those ratios into the standard normal hazard
``h(x) = phi(x) / (1 - Phi(x))``, which is what the closed forms below use.
"""
from __future__ import annotations

import enum
import math
import warnings

import numpy as np
from scipy import stats
from scipy.special import log_ndtr, ndtr, pdtr

from .exact import PerformanceIndicators, assemble
from .model import Abandonment, DerivedCoefficients, ModelParams, check, sub_chain_scale

LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)
_MILLS_SWITCH = 8.0
_CF_TERMS = 80


class ApproximationQualityWarning(UserWarning):
    """An approximation was evaluated far outside the regime where it is meaningful."""


# --------------------------------------------------------------------------
# normal kit


def normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x - LOG_SQRT_2PI)


def normal_cdf(x):
    return ndtr(x)


def _hazard_cf(x: np.ndarray) -> np.ndarray:
    # continued fraction x + 1/(x + 2/(x + 3/(x + ...))), evaluated bottom-up
    f = np.array(x, dtype=float, copy=True)
    for n in range(_CF_TERMS, 0, -1):
        f = x + n / f
    return f


def log_hazard(x):
    """``log h(x)``, finite for every finite ``x``."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    hi = x > _MILLS_SWITCH
    out[hi] = np.log(_hazard_cf(x[hi]))
    lo = ~hi
    xl = x[lo]
    out[lo] = -0.5 * xl * xl - LOG_SQRT_2PI - log_ndtr(-xl)
    return out if out.ndim else float(out)


def hazard(x):
    """Standard normal hazard ``phi(x) / (1 - Phi(x))``.

    Above ``x = 8`` the survival function is too small for the direct ratio,
    so the Mills-ratio continued fraction is used instead.  Below ``-30`` the
    ratio is formed in log space.  Underflows to zero for ``x < -38.5``.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    hi = x > _MILLS_SWITCH
    out[hi] = _hazard_cf(x[hi])
    mid = (x >= -30.0) & ~hi
    out[mid] = normal_pdf(x[mid]) / ndtr(-x[mid])
    lo = x < -30.0
    out[lo] = np.exp(log_hazard(x[lo]))
    return out if out.ndim else float(out)


# --------------------------------------------------------------------------
# Poisson and its approximations


def poisson_pmf(s, R):
    return stats.poisson.pmf(s, R)


def poisson_cdf(s, R):
    """``F_P(s; R)`` through the regularized incomplete gamma function."""
    return pdtr(s, R)


def _c_and_delta(s, R):
    s = np.asarray(s, dtype=float)
    root = np.sqrt(R)
    return (s - R) / root, 0.5 / root


def poisson_cdf_normal(s, R):
    """``F_P(s;R) ~ Phi(c + Delta)``; ``s`` may be real."""
    c, d = _c_and_delta(s, R)
    return ndtr(c + d)


def poisson_pmf_normal(s, R):
    """``f_P(s;R) ~ phi(c + Delta) / sqrt(R)``."""
    c, d = _c_and_delta(s, R)
    return normal_pdf(c + d) / np.sqrt(R)


def poisson_upper_ratio_normal(s, R):
    """``f_P / (1 - F_P) ~ h(c + Delta) / sqrt(R)``."""
    c, d = _c_and_delta(s, R)
    return hazard(c + d) / np.sqrt(R)


def poisson_lower_ratio_normal(s, R):
    """``f_P / F_P ~ h(-c - Delta) / sqrt(R)``."""
    c, d = _c_and_delta(s, R)
    return hazard(-c - d) / np.sqrt(R)


def _wh_z(s, R):
    # cube-root normalisation of the Gamma(s+1) tail, P(N <= s) = P(Gamma(s+1) > R);
    # increasing in s, so Phi(z) behaves like a CDF
    n = np.asarray(s, dtype=float) + 1.0
    return (1.0 - 1.0 / (9.0 * n) - np.cbrt(R / n)) * 3.0 * np.sqrt(n)


def wilson_hilferty_cdf(s, R):
    """Wilson-Hilferty approximation ``F_P(s;R) ~ Phi(z(s,R))``,
    ``z = (1 - 1/(9(s+1)) - (R/(s+1))^(1/3)) * 3 sqrt(s+1)``."""
    s = np.asarray(s, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(s + 1.0 > 0, ndtr(_wh_z(np.maximum(s, -1.0 + 1e-300), R)), 0.0)
    return out if out.ndim else float(out)


def wilson_hilferty_pmf(s, R):
    """``f_P(s;R) ~ Phi(z(s,R)) - Phi(z(s-1,R))`` with ``Phi(z(-1,R))`` taken as 0."""
    s = np.asarray(s, dtype=float)
    return wilson_hilferty_cdf(s, R) - wilson_hilferty_cdf(s - 1.0, R)


# --------------------------------------------------------------------------
# blocking probabilities


class SubChain(str, enum.Enum):
    MMSS = "mmss"
    RENEGING = "reneging"
    BALKING = "balking"


def inv_blocking_normal(sub: SubChain, coeffs: DerivedCoefficients) -> float:
    """Normal approximation of a sub-chain's inverse blocking probability.

    M/M/s/s: ``sqrt(R) / h(-c - Delta)``; reneging: ``1 + sqrt(R') / h(c' + Delta')``;
    balking: ``sqrt(R'') / h(-c'' - Delta'')``.
    """
    sub = SubChain(sub)
    if sub is SubChain.MMSS:
        scale = coeffs.sub1
    else:
        if Abandonment(sub.value) is not coeffs.kind:
            raise ValueError(f"coefficients describe a {coeffs.kind.value} model, not {sub.value}")
        scale = coeffs.sub2
    root = math.sqrt(scale.R)
    if sub is SubChain.RENEGING:
        return 1.0 + root / hazard(scale.c + scale.delta_cc)
    return root / hazard(-scale.c - scale.delta_cc)


def _log_x1_normal(R: float, s: float) -> float:
    c = (s - R) / math.sqrt(R)
    return 0.5 * math.log(R) - log_hazard(-c - 0.5 / math.sqrt(R))


def _nonasym(params: ModelParams, s: float) -> PerformanceIndicators:
    """Non-asymptotic indicators at a possibly non-integral staffing level ``s``."""
    R = params.offered_load
    log_x1 = _log_x1_normal(R, s)
    kind = params.abandon.kind
    if params.lam_q == 0:
        # congested sub-chain is the single state s
        return _assemble_real_s(params, s, log_x1, -math.inf)
    scale = sub_chain_scale(kind, params.lam_q, params.mu_q, s, params.theta)
    c2, d2 = scale.c, scale.delta_cc
    if kind is Abandonment.RENEGING:
        log_b = 0.5 * math.log(scale.R) - log_hazard(c2 + d2)
        return _assemble_real_s(params, s, log_x1, log_b)
    log_x2 = 0.5 * math.log(scale.R) - log_hazard(-c2 - d2)
    if log_x2 >= 0:
        log_b = log_x2 + math.log1p(-math.exp(-log_x2)) if log_x2 > 0 else -math.inf
        return _assemble_real_s(params, s, log_x1, log_b)
    # the -1/sqrt(R) correction overshoots: P_{Q-} would be negative
    warnings.warn("balking normal representation left its validity regime; "
                  "clamping P_Q- to [0, 1]", ApproximationQualityWarning, stacklevel=3)
    log_b = math.log(-math.expm1(log_x2))
    ind = _assemble_real_s(params, s, log_x1, log_b, negative_b=True)
    return _clamped(params, s, ind)


class _RealStaffing:
    """Duck-typed stand-in for :class:`ModelParams` with a real-valued ``s``."""

    def __init__(self, params: ModelParams, s: float):
        self._params = params
        self.s = s

    def __getattr__(self, name):
        return getattr(self._params, name)

    @property
    def p(self) -> float:
        return 1.0 - self.s * self._params.mu_q / self._params.lam


def _assemble_real_s(params, s, log_x1, log_b, negative_b=False):
    target = params if s == params.s else _RealStaffing(params, s)
    return assemble(target, log_x1, log_b, negative_b=negative_b)


def _clamped(params, s, ind: PerformanceIndicators) -> PerformanceIndicators:
    pi_s = min(max(ind.pi_s, 0.0), 1.0) if math.isfinite(ind.pi_s) else 1.0
    p_q_minus = min(max(ind.p_q_minus, 0.0), 1.0 - pi_s) if math.isfinite(ind.p_q_minus) else 0.0
    p = 1.0 - s * params.mu_q / params.lam
    eps, lam, theta = params.cbc.eps, params.lam, params.theta
    p_q = pi_s + p_q_minus
    p_ab = min(max(pi_s + p * p_q_minus, 0.0), 1.0)
    l_q = max((lam / theta) * ((1 - eps) * pi_s + (p - eps) * p_q_minus), 0.0)
    lam_eff = lam * (1 - p_ab)
    return PerformanceIndicators(
        pi_s=pi_s, p_block=ind.p_block, pi_s2=ind.pi_s2, p_q=p_q, p_q_minus=p_q_minus,
        p_ab=p_ab, l_q=l_q, w_q=l_q / lam_eff if lam_eff > 0 else math.nan,
        lambda_eff=lam_eff, throughput=lam * (1 - p_ab))


def indicators_nonasymptotic(params: ModelParams) -> PerformanceIndicators:
    """Closed-form normal representation of all indicators.

    ``pi_s`` and ``P_Q-`` come from the hazard-function closed forms; then
    ``P_Q = pi_s + P_Q-``, ``P_ab = pi_s + p P_Q-`` and
    ``L_Q = (lam/theta)((1-eps) pi_s + (p-eps) P_Q-)``.  Intended for rate
    parameters of roughly 10 or more; not enforced.
    """
    check(params)
    return _nonasym(params, float(params.s))


def nonasymptotic_at(params: ModelParams, s: float) -> PerformanceIndicators:
    """:func:`indicators_nonasymptotic` with a real-valued staffing level (for root finding)."""
    check(params)
    if not s > 0:
        raise ValueError("real staffing level must be positive")
    return _nonasym(params, float(s))


def indicators_wilson_hilferty(params: ModelParams) -> PerformanceIndicators:
    """Indicators with every Poisson CDF/PMF replaced by its Wilson-Hilferty approximation."""
    check(params)
    R, s = params.offered_load, params.s
    x1 = float(wilson_hilferty_cdf(s, R) / wilson_hilferty_pmf(s, R))
    log_x1 = math.log(x1)
    if params.lam_q == 0:
        return assemble(params, log_x1, -math.inf)
    scale = sub_chain_scale(params.abandon.kind, params.lam_q, params.mu_q, s, params.theta)
    f = float(wilson_hilferty_pmf(scale.s, scale.R))
    F = float(wilson_hilferty_cdf(scale.s, scale.R))
    if params.is_reneging:
        b = (1.0 - F) / f
    else:
        b = F / f - 1.0
    if b < 0:
        warnings.warn("Wilson-Hilferty representation gave 1/pi_s^2 < 1; clamping",
                      ApproximationQualityWarning, stacklevel=2)
        b = 0.0
    return assemble(params, log_x1, math.log(b) if b > 0 else -math.inf)
