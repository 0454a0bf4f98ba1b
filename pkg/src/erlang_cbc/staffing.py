"""Minimum staffing for a delay- or abandonment-probability target.

Both metrics fall strictly from 1 towards 0 as staff are added, so the
smallest ``s`` with ``metric(s) < alpha`` is found by doubling a bracket and
bisecting on integers.  For the closed-form evaluators the continuous root
``c`` of ``metric(R + c sqrt(R)) = alpha`` is also solved, and its ceiling
``ceil(R + c sqrt(R))`` is reported next to the integer answer.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .approx import indicators_nonasymptotic, nonasymptotic_at
from .asymptotic import sqrt_staffing_erlang_a, sqrt_staffing_modified
from .exact import PerformanceIndicators, indicators_exact
from .model import ModelParams, check

DEFAULT_STAFF_CAP = 10**6
C_TOL = 1e-10


class UnsatisfiableError(RuntimeError):
    """No staffing level up to the cap meets the target."""


class NotApplicableError(ValueError):
    """The square-root rule was asked for outside the ``R_Q == R`` line."""


class Metric(str, enum.Enum):
    DELAY = "delay"
    ABANDONMENT = "abandonment"


class Evaluator(str, enum.Enum):
    EXACT = "exact"
    NONASYMPTOTIC = "nonasym"
    SQRT_STAFFING = "sqrt"


@dataclass(frozen=True)
class StaffingQuery:
    """``base.s`` is ignored; it is the variable being solved for."""

    base: ModelParams
    target: float
    metric: Metric = Metric.DELAY
    evaluator: Evaluator = Evaluator.EXACT
    cap: int = DEFAULT_STAFF_CAP

    def __post_init__(self):
        if not 0.0 < self.target < 1.0:
            raise ValueError("target must lie strictly between 0 and 1")
        object.__setattr__(self, "metric", Metric(self.metric))
        object.__setattr__(self, "evaluator", Evaluator(self.evaluator))


@dataclass(frozen=True)
class StaffingResult:
    s: int
    achieved: PerformanceIndicators
    metric_value: float
    c_root: float | None = None
    s_ceiling: int | None = None


def _sqrt_rule(base: ModelParams, c: float) -> PerformanceIndicators:
    eps, tau = base.cbc.eps, base.cbc.tau
    R = base.offered_load
    if eps + tau != 0.0:
        raise NotApplicableError("square-root staffing applies only when R_Q == R (eps + tau == 0)")
    if eps == 0.0 and tau == 0.0:
        p_q, p_ab = sqrt_staffing_erlang_a(c, R, base.mu / base.theta)
    else:
        p_q, p_ab = sqrt_staffing_modified(c, R, eps, base.mu_q / base.theta)
    return PerformanceIndicators(p_q=p_q, p_ab=p_ab)


def evaluate(params: ModelParams, evaluator: Evaluator) -> PerformanceIndicators:
    evaluator = Evaluator(evaluator)
    if evaluator is Evaluator.EXACT:
        return indicators_exact(params)
    if evaluator is Evaluator.NONASYMPTOTIC:
        return indicators_nonasymptotic(params)
    R = params.offered_load
    return _sqrt_rule(params, (params.s - R) / math.sqrt(R))


def _pick(ind: PerformanceIndicators, metric: Metric) -> float:
    return ind.p_q if metric is Metric.DELAY else ind.p_ab


def metric_at(query: StaffingQuery, s: int) -> float:
    """Metric value at integer staffing ``s``; no servers at all counts as 1."""
    if s <= 0:
        return 1.0
    return _pick(evaluate(query.base.replace(s=int(s)), query.evaluator), query.metric)


def metric_at_c(query: StaffingQuery, c: float) -> float:
    """Metric at the real staffing level ``R + c sqrt(R)``."""
    base = query.base
    R = base.offered_load
    if query.evaluator is Evaluator.SQRT_STAFFING:
        return _pick(_sqrt_rule(base, c), query.metric)
    if query.evaluator is Evaluator.NONASYMPTOTIC:
        return _pick(nonasymptotic_at(base, R + c * math.sqrt(R)), query.metric)
    raise ValueError("continuous root is only defined for closed-form evaluators")


def continuous_root(query: StaffingQuery) -> float:
    """Solve ``metric(R + c sqrt(R)) = alpha`` for ``c`` by bisection on ``[-sqrt(R), c_hi]``."""
    R = query.base.offered_load
    alpha = query.target
    lo = -math.sqrt(R) * (1.0 - 1e-9)
    if metric_at_c(query, lo) < alpha:
        raise UnsatisfiableError("root lies below c = -sqrt(R) (zero staff)")
    hi = 1.0
    while metric_at_c(query, hi) >= alpha:
        lo = max(lo, hi)
        hi *= 2.0
        if R + hi * math.sqrt(R) > query.cap:
            raise UnsatisfiableError(f"target not met below the staffing cap {query.cap}")
    while hi - lo >= C_TOL:
        mid = 0.5 * (lo + hi)
        if metric_at_c(query, mid) >= alpha:
            lo = mid
        else:
            hi = mid
    return hi


def min_staff(query: StaffingQuery) -> StaffingResult:
    """Smallest integer ``s`` with ``metric(s) < alpha`` under the chosen evaluator."""
    check(query.base.replace(s=max(query.base.s, 0)))
    alpha = query.target
    lo, hi = 0, 1
    while metric_at(query, hi) >= alpha:
        lo, hi = hi, hi * 2
        if hi > query.cap:
            if metric_at(query, query.cap) >= alpha:
                raise UnsatisfiableError(f"target {alpha} not met at the staffing cap {query.cap}")
            hi = query.cap
            break
    # invariant: metric(lo) >= alpha > metric(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if metric_at(query, mid) >= alpha:
            lo = mid
        else:
            hi = mid
    achieved = evaluate(query.base.replace(s=hi), query.evaluator)
    c_root = s_ceiling = None
    if query.evaluator is not Evaluator.EXACT:
        R = query.base.offered_load
        c_root = continuous_root(query)
        s_ceiling = math.ceil(R + c_root * math.sqrt(R))
    return StaffingResult(hi, achieved, _pick(achieved, query.metric), c_root, s_ceiling)


@dataclass(frozen=True)
class StaffingRow:
    theta: float
    target: float
    exact: int
    differences: dict[str, int]


def staffing_table(base: ModelParams, targets: Iterable[float],
                   evaluators: Sequence[Evaluator], rates: Iterable[float] | None = None,
                   metric: Metric = Metric.DELAY) -> list[StaffingRow]:
    """Exact staffing per (abandonment rate, target) plus each evaluator's offset from it."""
    rows = []
    rates = [base.theta] if rates is None else list(rates)
    for theta in rates:
        params = base.replace(abandon=type(base.abandon)(base.abandon.kind, float(theta)))
        for alpha in targets:
            exact = min_staff(StaffingQuery(params, alpha, metric, Evaluator.EXACT)).s
            diffs = {}
            for ev in evaluators:
                ev = Evaluator(ev)
                diffs[ev.value] = min_staff(StaffingQuery(params, alpha, metric, ev)).s - exact
            rows.append(StaffingRow(float(theta), float(alpha), exact, diffs))
    return rows
