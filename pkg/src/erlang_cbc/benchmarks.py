"""Published benchmark values used by the ``reproduce`` command and the acceptance tests."""
from __future__ import annotations

# staffing to meet a delay target, lam=50, mu=1, no control:
# (gamma, alpha, exact s, nonasym - exact, sqrt rule - exact)
STAFFING_ROWS = (
    (10.0, 0.95, 20, -1, -8),
    (10.0, 0.83, 30, 0, -5),
    (10.0, 0.60, 40, +1, -2),
    (10.0, 0.30, 50, 0, -2),
    (1.0, 0.95, 40, -1, -1),
    (1.0, 0.83, 44, 0, 0),
    (1.0, 0.60, 49, 0, +1),
    (1.0, 0.30, 55, 0, -1),
    (0.1, 0.95, 48, 0, 0),
    (0.1, 0.83, 50, 0, 0),
    (0.1, 0.60, 52, 0, 0),
    (0.1, 0.30, 56, 0, 0),
)
STAFFING_LAM, STAFFING_MU = 50.0, 1.0

# exact P_Q at two decimals, lam=50, mu=1, gamma=1, s in DELAY_S_GRID,
# keyed by (eps, tau); second entry is the printed max |exact - nonasym|
DELAY_S_GRID = (20, 30, 40, 50, 60, 70, 80)
DELAY_BLOCKS = {
    (0.0, 0.0): ((1.00, 1.00, 0.94, 0.52, 0.09, 0.00, 0.00), 0.009),
    (0.0, 0.2): ((1.00, 0.99, 0.79, 0.35, 0.06, 0.00, 0.00), 0.008),
    (0.2, 0.0): ((1.00, 0.97, 0.73, 0.32, 0.06, 0.00, 0.00), 0.010),
    (0.2, 0.2): ((1.00, 0.91, 0.59, 0.24, 0.05, 0.00, 0.00), 0.012),
    (0.2, 0.5): ((0.99, 0.80, 0.48, 0.20, 0.04, 0.00, 0.00), 0.011),
    (0.5, 0.2): ((0.92, 0.68, 0.40, 0.16, 0.03, 0.00, 0.00), 0.012),
}
DELAY_LAM, DELAY_MU, DELAY_GAMMA = 50.0, 1.0, 1.0
DELAY_OVERALL_MAX = 0.012
DELAY_MAX_SLACK = 0.001
