# coding: utf-8

# # The basic model: one price per interval
#
# With a time-invariant value of money the optimal policy is constant between
# consecutive constraint times and never decreases. The solver walks forward
# from `t = 0`: at each step it computes, for every later constraint, the
# price that would meet it *exactly* if held from now on, takes the lowest of
# those prices, and holds it until the constraint that produced it.
#
# Run from the repository root:
#
#     python3 demos/01_basic_policy.py

from pathlib import Path

import numpy as np

from price_opt import load_scenario, simulate, solve_basic

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "demos" / "out"
OUT.mkdir(exist_ok=True)

# ## The two-interval toy
#
# Flat demand of one customer per day, `v(p) = 1 - p`, 0.8 units over two
# days, at least 0.45 of them by day one.

s = load_scenario(ROOT / "scenarios" / "two_interval.json")
policy, trace = solve_basic(s)
print(trace.format())

# Holding a single price for both days would sell the stock at `p = 0.6`,
# but then only 0.4 units are gone by day one. The day-one bound binds
# first, so the first segment charges 0.55 and the remainder is sold at 0.65.

for seg in policy.segments:
    print(f"[{seg.t_start:g}, {seg.t_end:g}): p = {seg.value:.6f}")

# ## Simulating the policy
#
# The simulator integrates sales and revenue on a fine grid that contains
# every breakpoint, so price jumps are handled exactly.

run = simulate(s, policy, dt=1e-3)
print(f"sales {run.final_sales:.6f}, revenue {run.final_objective_revenue:.6f}")
print("slack at the constraint times (sales):", np.round(run.sales_slack, 9))

(OUT / "01_two_interval.csv").write_text(run.to_csv())

# ## A synthetic multi-year schedule
#
# Six revenue milestones every 180 days on a 1260-day horizon with seasonal
# demand. Prices step up at each milestone the solver binds.

big = load_scenario(ROOT / "scenarios" / "synthetic_basic.json")
policy, trace = solve_basic(big)
for seg in policy.segments:
    print(f"days [{seg.t_start:6.0f}, {seg.t_end:6.0f}): p = {seg.value:.4f}")
print("binding:", [(st.binding_index, st.binding_kind) for st in trace.steps])
