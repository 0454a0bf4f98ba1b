"""Shared randomized configuration generators for the test-suite."""
from __future__ import annotations

import numpy as np

from erlang_cbc.model import balking, reneging


def log_uniform(rng, lo, hi):
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def random_control(rng):
    u = rng.random()
    if u < 0.15:
        return 0.0, 0.0
    if u < 0.25:
        return 1.0, float(rng.uniform(-0.5, 1.0))
    eps = float(rng.uniform(0.0, 0.9))
    tau = float(rng.uniform(max(-eps, -0.9), 1.0))
    return eps, tau


def random_config(rng, kind=None, R_range=(5.0, 500.0), s_spread=(0.6, 1.4), theta_range=(0.05, 20.0)):
    """One valid parameter set with offered load drawn log-uniformly from ``R_range``."""
    kind = kind or ("reneging" if rng.random() < 0.5 else "balking")
    mu = log_uniform(rng, 0.5, 2.0)
    R = log_uniform(rng, *R_range)
    s = max(1, int(round(R * rng.uniform(*s_spread))))
    theta = log_uniform(rng, *theta_range)
    eps, tau = random_control(rng)
    make = reneging if kind == "reneging" else balking
    return make(R * mu, mu, s, theta, eps, tau)


def random_configs(n, seed, **kw):
    rng = np.random.default_rng(seed)
    return [random_config(rng, **kw) for _ in range(n)]

# one line per acceptance criterion, printed in the pytest terminal summary
ACCEPTANCE_LINES: list[str] = []
