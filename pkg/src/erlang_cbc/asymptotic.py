"""Large-system limits, service-regime classification and phase diagrams.

With ``R_Q < R`` the quality-and-efficiency-driven (QED) regime is the
whole band ``R_Q < s < R`` and the delay probability falls linearly across
it.  With ``R_Q == R`` the band collapses to the single point ``s = R``
where all three regimes meet; there the square-root scale ``c`` is needed.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .approx import log_hazard
from .exact import PerformanceIndicators
from .model import ModelParams, check

BOUNDARY_RTOL = 1e-12


class Regime(str, enum.Enum):
    ED = "ED"
    QED_LINEAR = "QED_linear"
    QED_SQRT = "QED_sqrt"
    QD = "QD"
    BOUNDARY_ED_QED = "BoundaryEDQED"
    BOUNDARY_QED_QD = "BoundaryQEDQD"


class Representation(str, enum.Enum):
    STAFFING_LEVEL = "staffing"
    TRAFFIC_INTENSITY = "traffic"


def _close(x: float, y: float) -> bool:
    return abs(x - y) <= BOUNDARY_RTOL * max(1.0, abs(x), abs(y))


def _kernel_logs(c, ratio):
    c = np.asarray(c, dtype=float)
    root = math.sqrt(ratio)
    log_right = 0.5 * math.log(ratio) - log_hazard(root * c)
    log_left = -log_hazard(-c)
    return log_right, np.logaddexp(log_left, log_right)


def phi_kernel(c, ratio: float):
    """``[sqrt(r)/h(sqrt(r) c)] / [1/h(-c) + sqrt(r)/h(sqrt(r) c)]`` with ``r = mu_q/theta``."""
    if not ratio > 0:
        raise ValueError("ratio must be positive")
    log_right, log_den = _kernel_logs(c, ratio)
    out = np.exp(log_right - log_den)
    return float(out) if np.ndim(out) == 0 else out


def omega_kernel(c, ratio: float):
    """``1 / [1/h(-c) + sqrt(r)/h(sqrt(r) c)]``."""
    if not ratio > 0:
        raise ValueError("ratio must be positive")
    _, log_den = _kernel_logs(c, ratio)
    out = np.exp(-log_den)
    return float(out) if np.ndim(out) == 0 else out


def classify_regime(s_over_R: float, rq_over_r: float) -> Regime:
    """Asymptotic service regime of staffing ``s/R`` at intervention level ``R_Q/R``.

    Equalities (to a relative 1e-12) get their own boundary labels; the
    point ``s/R = R_Q/R = 1`` is :attr:`Regime.QED_SQRT`.
    """
    x, y = float(s_over_R), float(rq_over_r)
    if x < 0 or not 0.0 <= y <= 1.0 + BOUNDARY_RTOL:
        raise ValueError("need s/R >= 0 and 0 <= R_Q/R <= 1")
    if _close(y, 1.0):
        if _close(x, 1.0):
            return Regime.QED_SQRT
        return Regime.ED if x < 1.0 else Regime.QD
    if _close(x, y):
        return Regime.BOUNDARY_ED_QED
    if _close(x, 1.0):
        return Regime.BOUNDARY_QED_QD
    if x < y:
        return Regime.ED
    return Regime.QED_LINEAR if x < 1.0 else Regime.QD


def _linear_limits(regime: Regime, x: float, y: float, eps: float, tau: float) -> tuple[float, float]:
    if regime is Regime.ED:
        return 1.0, 1.0 - (1.0 + tau) * x
    if regime is Regime.QD:
        return 0.0, 0.0
    # QED band and both of its edges use the linear formula
    p_q = min(max((1.0 - x) / (1.0 - y), 0.0), 1.0)
    return p_q, eps * p_q


def regime_of(params: ModelParams) -> Regime:
    check(params)
    R = params.offered_load
    return classify_regime(params.s / R, params.congested_load / R)


def indicators_asymptotic(params: ModelParams) -> PerformanceIndicators:
    """Large-``R`` limits of ``P_Q`` and ``P_ab``.

    ``R_Q < R``: ED gives ``(1, p)``, the QED band ``(1 - s/R)/(1 - R_Q/R)``
    with ``P_ab = eps P_Q``, QD gives zeros.  ``R_Q == R``: the square-root
    form ``P_Q = phi(c)``, ``P_ab = eps phi(c)`` is returned for every ``s``;
    it tends to the step function at ``s = R`` as ``R`` grows.  Identical
    for reneging and balking with the same ``theta``.
    """
    check(params)
    R = params.offered_load
    y = params.congested_load / R
    x = params.s / R
    eps = params.cbc.eps
    if _close(y, 1.0):
        c = (params.s - R) / math.sqrt(R)
        p_q = phi_kernel(c, params.mu_q / params.theta)
        return PerformanceIndicators(p_q=p_q, p_ab=eps * p_q)
    p_q, p_ab = _linear_limits(classify_regime(x, y), x, y, eps, params.cbc.tau)
    return PerformanceIndicators(p_q=p_q, p_ab=p_ab)


# --------------------------------------------------------------------------
# phase diagrams


@dataclass(frozen=True)
class PhaseCell:
    x: float
    intervention: float
    regime: Regime
    p_q: float
    p_ab: float


@dataclass(frozen=True)
class PhaseDiagramGrid:
    representation: Representation
    nx: int
    ny: int
    tau: float
    cells: tuple[PhaseCell, ...]

    def row(self, j: int) -> tuple[PhaseCell, ...]:
        return self.cells[j * self.nx:(j + 1) * self.nx]


def qed_band(representation: Representation, intervention: float) -> tuple[float, float]:
    """Open interval of ``x`` that is QED at intervention level ``1 - R_Q/R``."""
    y = 1.0 - intervention
    if Representation(representation) is Representation.STAFFING_LEVEL:
        return y, 1.0
    return 1.0, (math.inf if y == 0 else 1.0 / y)


def phase_diagram(representation, nx: int, ny: int, x_range=None,
                  tau: float = 0.0, ratio: float = 1.0) -> PhaseDiagramGrid:
    """Label a ``nx`` x ``ny`` grid of (staffing or traffic, intervention) points.

    The intervention axis ``1 - R_Q/R`` runs over [0, 1].  It is realised
    with a fixed service boost ``tau`` and ``eps = 1 - (1 - y)(1 + tau)``;
    with the default ``tau = 0`` the top row is ``eps = 1`` (Erlang B).
    ``ratio`` is ``mu_q/theta`` for the singular point, where
    ``P_Q = phi(0)``.
    """
    representation = Representation(representation)
    if nx < 2 or ny < 2:
        raise ValueError("grid needs at least 2 points per axis")
    if x_range is None:
        x_range = (0.0, 2.0)
    lo, hi = map(float, x_range)
    if not (hi > lo >= 0.0):
        raise ValueError("x_range must satisfy 0 <= lo < hi")
    xs = np.linspace(lo, hi, nx)
    ys = np.linspace(0.0, 1.0, ny)
    cells = []
    for yv in ys:
        y = float(yv)
        rq_over_r = 1.0 - y
        eps = 1.0 - rq_over_r * (1.0 + tau)
        if eps < -BOUNDARY_RTOL:
            raise ValueError(f"tau={tau} cannot realise intervention level {y}")
        eps = min(max(eps, 0.0), 1.0)
        for xv in xs:
            x = float(xv)
            if representation is Representation.STAFFING_LEVEL:
                s_over_R = x
            else:
                s_over_R = math.inf if x == 0 else 1.0 / x
            if math.isinf(s_over_R):
                regime, p_q, p_ab = Regime.QD, 0.0, 0.0
            else:
                regime = classify_regime(s_over_R, rq_over_r)
                if regime is Regime.QED_SQRT:
                    p_q = phi_kernel(0.0, ratio)
                    p_ab = eps * p_q
                else:
                    p_q, p_ab = _linear_limits(regime, s_over_R, rq_over_r, eps, tau)
            cells.append(PhaseCell(x, y, regime, p_q, p_ab))
    return PhaseDiagramGrid(representation, nx, ny, tau, tuple(cells))


# --------------------------------------------------------------------------
# square-root staffing rules


def sqrt_staffing_erlang_a(c: float, R: float, mu_over_gamma: float) -> tuple[float, float]:
    """Classical Erlang A square-root staffing rule at ``s = R + c sqrt(R)``.

    Returns ``(P_Q, P_ab)`` with ``P_Q = phi(c)`` and
    ``P_ab = omega(c)/sqrt(R) - (c/sqrt(R)) phi(c)``.
    """
    if not R > 0:
        raise ValueError("R must be positive")
    p_q = phi_kernel(c, mu_over_gamma)
    root = math.sqrt(R)
    return p_q, omega_kernel(c, mu_over_gamma) / root + (-c / root) * p_q


def sqrt_staffing_modified(c: float, R: float, eps: float, mu_q_over_theta: float) -> tuple[float, float]:
    """Square-root rule for the controlled model on the ``R_Q == R`` line.

    Keeps the ``pi_s ~ omega(c)/sqrt(R)`` term in ``P_Q`` that the classical
    rule drops: ``P_Q = phi(c) + omega(c)/sqrt(R)`` and
    ``P_ab = omega(c)/sqrt(R) + (eps - (1 - eps) c/sqrt(R)) phi(c)``.
    """
    if not R > 0:
        raise ValueError("R must be positive")
    root = math.sqrt(R)
    ph = phi_kernel(c, mu_q_over_theta)
    om = omega_kernel(c, mu_q_over_theta) / root
    p_star = eps - (1.0 - eps) * c / root
    return ph + om, om + p_star * ph
