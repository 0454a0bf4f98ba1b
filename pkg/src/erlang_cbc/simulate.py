"""Event-driven simulation of the controlled Erlang A chain.

Because every clock is exponential, the system is simulated as its
birth-death jump chain: draw the holding time from the total event rate,
then pick the event in proportion to its rate.  Service-rate modulation
above ``s`` is therefore exact.  Arrivals always occur at rate ``lam``;
when all servers are busy a fraction ``eps`` is turned away (and, under
balking, a further ``delta (k - s)``), and these count as abandonments.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy import stats

from .model import ModelParams, check

METRICS = ("p_q", "p_ab", "l_q", "w_q", "l")


def worker_count() -> int:
    """Thread count from ``ERLANG_CBC_THREADS`` (unset or 0 means one per CPU)."""
    raw = os.environ.get("ERLANG_CBC_THREADS", "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ValueError("ERLANG_CBC_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


@njit(nogil=True, cache=True)
def _run_chain(rng, lam, eps, mu, mu_q, s, reneging, theta, warmup, horizon):
    lam_q = (1.0 - eps) * lam
    end = warmup + horizon
    t = 0.0
    k = 0
    arrivals = 0
    delayed = 0
    lost = 0
    admitted = 0
    area_q = 0.0
    area_k = 0.0
    total_arrived = 0
    total_served = 0
    total_lost = 0
    while True:
        if k <= s:
            death = k * mu
        elif reneging:
            death = s * mu_q + (k - s) * theta
        else:
            death = s * mu_q
        rate = lam + death
        t_next = t + rng.standard_exponential() / rate
        if t_next > warmup:
            lo = t if t > warmup else warmup
            hi = t_next if t_next < end else end
            if hi > lo:
                queue = k - s if k > s else 0
                area_q += queue * (hi - lo)
                area_k += k * (hi - lo)
        if t_next >= end:
            break
        t = t_next
        counting = t >= warmup
        u = rng.random() * rate
        if u < lam:
            total_arrived += 1
            if counting:
                arrivals += 1
            admit = True
            if k >= s:
                if counting:
                    delayed += 1
                # u is uniform on [0, lam) given an arrival; reuse it to thin
                if reneging:
                    admit_rate = lam_q
                else:
                    admit_rate = lam_q - theta * (k - s)
                admit = u < admit_rate
            if admit:
                k += 1
                if counting:
                    admitted += 1
            else:
                total_lost += 1
                if counting:
                    lost += 1
        else:
            if reneging and k > s and u - lam >= s * mu_q:
                total_lost += 1
                if counting:
                    lost += 1
            else:
                total_served += 1
            k -= 1
    return (arrivals, delayed, lost, admitted, area_q, area_k,
            total_arrived, total_served, total_lost, k)


@dataclass(frozen=True)
class SimConfig:
    params: ModelParams
    horizon: float
    replications: int = 20
    seed: int = 0
    warmup: float | None = None

    def __post_init__(self):
        check(self.params)
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if self.replications < 1:
            raise ValueError("need at least one replication")
        if self.warmup is None:
            object.__setattr__(self, "warmup", 0.1 * self.horizon)
        elif self.warmup < 0:
            raise ValueError("warmup must be non-negative")


@dataclass(frozen=True)
class Replication:
    """Counters of one run; the window counters exclude the warm-up."""

    arrivals: int
    delayed: int
    lost: int
    admitted: int
    area_q: float
    area_k: float
    total_arrived: int
    total_served: int
    total_lost: int
    in_system_at_end: int
    horizon: float

    def metrics(self) -> dict[str, float]:
        n = self.arrivals
        return {
            "p_q": self.delayed / n if n else math.nan,
            "p_ab": self.lost / n if n else math.nan,
            "l_q": self.area_q / self.horizon,
            "w_q": self.area_q / self.admitted if self.admitted else math.nan,
            "l": self.area_k / self.horizon,
        }


@dataclass(frozen=True)
class SimEstimate:
    mean: dict[str, float]
    half_width: dict[str, float]
    replications: int
    runs: tuple[Replication, ...]

    def interval(self, metric: str) -> tuple[float, float]:
        m, h = self.mean[metric], self.half_width[metric]
        return m - h, m + h

    def covers(self, metric: str, value: float) -> bool:
        lo, hi = self.interval(metric)
        return lo <= value <= hi


def _one(params: ModelParams, config: SimConfig, seq: np.random.SeedSequence) -> Replication:
    rng = np.random.Generator(np.random.PCG64(seq))
    out = _run_chain(rng, params.lam, params.cbc.eps, params.mu, params.mu_q, params.s,
                     params.is_reneging, params.theta, float(config.warmup), float(config.horizon))
    return Replication(*out, horizon=float(config.horizon))


def simulate(config: SimConfig) -> SimEstimate:
    """Replicated simulation with 95% t-intervals across replications.

    Replication ``i`` draws from ``SeedSequence(seed).spawn(n)[i]`` so the
    result does not depend on thread scheduling.  ``W_Q`` is the queue-time
    integral over the window divided by the customers admitted in it.
    """
    seqs = np.random.SeedSequence(config.seed).spawn(config.replications)
    workers = min(worker_count(), config.replications)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            runs = tuple(pool.map(lambda sq: _one(config.params, config, sq), seqs))
    else:
        runs = tuple(_one(config.params, config, sq) for sq in seqs)
    table = np.array([[r.metrics()[m] for m in METRICS] for r in runs])
    n = len(runs)
    mean = table.mean(axis=0)
    if n > 1:
        half = stats.t.ppf(0.975, n - 1) * table.std(axis=0, ddof=1) / math.sqrt(n)
    else:
        half = np.full(len(METRICS), math.inf)
    return SimEstimate(
        mean={m: float(v) for m, v in zip(METRICS, mean)},
        half_width={m: float(v) for m, v in zip(METRICS, half)},
        replications=n,
        runs=runs,
    )
