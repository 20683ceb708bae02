# coding: utf-8

# # Certifying the solvers by brute force
#
# On instances with at most three intervals every assignment of one grid
# price per interval can be scored in closed form. The solver's revenue must
# never be beaten by more than the grid resolution allows.
#
#     python3 demos/05_oracle_certification.py

from pathlib import Path

import numpy as np

from price_opt import ConstraintSchedule, DemandCurve, LinearPropensity, Scenario, cumulative_at_grid, load_scenario
from price_opt import solve_basic, solve_tvm_linear
from price_opt.oracle import GridSearchSpec, best_piecewise_constant, best_piecewise_q

ROOT = Path(__file__).resolve().parent.parent

# ## The toy, where the optimum lies on the grid

s = load_scenario(ROOT / "scenarios" / "two_interval.json")
policy, _ = solve_basic(s)
res = best_piecewise_constant(s, GridSearchSpec(0.5, 0.8, 1e-3))
print("solver", policy.prices(), "oracle", res.values, f"revenue {res.revenue:.6f}")

# ## Off-grid optima
#
# Usually the optimal prices are not grid values, and a sell-out equality
# cannot be met exactly on the grid. The oracle treats the stock as a cap,
# so it must round prices *up* somewhere; the best rounding can trade price
# between intervals and end up several steps from the solver while still
# earning less.

# Here the stock alone binds: the solver holds one price, 0.64845, for two
# days. A short second interval lets the oracle soak up the leftover stock
# with a lower price there.

s = Scenario(
    2.0,
    DemandCurve.constant(1.0, 2.0),
    LinearPropensity(1.0, 1.0),
    ConstraintSchedule.build(2.0, 0.7031, [(1.8, None, None)]),
)
policy, _ = solve_basic(s)
_, rev = cumulative_at_grid(s, policy)
res = best_piecewise_constant(s, GridSearchSpec(0.5, 1.0, 1e-3))
mids = 0.5 * (s.taus[1:] + s.taus[:-1])
print("solver", np.round(policy.internal_price(s, mids), 5), f"revenue {rev[-1]:.6f}")
print("oracle", res.values, f"revenue {res.revenue:.6f}")

# ## Time value of money
#
# The multiplier oracle enumerates one `q` per interval instead.

s = load_scenario(ROOT / "scenarios" / "discount_single_stock.json")
policy, _ = solve_tvm_linear(s)
_, rev = cumulative_at_grid(s, policy)
res = best_piecewise_q(s, GridSearchSpec(-1.0, 0.0, 1e-4))
print(f"solver q {policy.segments[0].form.q:.5f} revenue {rev[-1]:.4f}; oracle q {res.values[0]:.4f} revenue {res.revenue:.4f}")
