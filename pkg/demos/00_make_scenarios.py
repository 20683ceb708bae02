# coding: utf-8

# # Building the shipped scenarios
#
# Every JSON file under `scenarios/` is produced by this script, so the
# instances can be regenerated (or tweaked) from one place. Run it from the
# repository root:
#
#     python3 demos/00_make_scenarios.py

import math
from pathlib import Path

from price_opt import ConstraintSchedule, DemandCurve, LinearPropensity, Scenario, ValueWeight, save_scenario
from price_opt.scenario import synthetic_scenario

OUT = Path(__file__).resolve().parent.parent / "scenarios"
OUT.mkdir(exist_ok=True)

# ## A two-interval toy
#
# Flat demand, `v(p) = 1 - p`, 0.8 units to sell over two days and at least
# 0.45 sold by day one. The optimum charges 0.55 and then 0.65.

two = Scenario(
    horizon=2.0,
    demand=DemandCurve.constant(1.0, 2.0),
    propensity=LinearPropensity(1.0, 1.0),
    schedule=ConstraintSchedule.build(2.0, 0.8, [(1.0, 0.45, None)]),
    name="two-interval",
)
save_scenario(two, OUT / "two_interval.json")

# ## Discounting with a single stock target
#
# The value of money decays as `exp(-t/1000)`. With only the stock to sell,
# the optimal price rises over time: selling early is worth more.

decay = Scenario(
    horizon=1000.0,
    demand=DemandCurve.constant(1.0, 1000.0),
    propensity=LinearPropensity(1.0, 1.0),
    schedule=ConstraintSchedule.build(1000.0, 300.0, []),
    phi=ValueWeight("exponential", rate=1e-3),
    name="discount-single-stock",
)
save_scenario(decay, OUT / "discount_single_stock.json")

# ## The synthetic three-and-a-half-year project
#
# 1000 units over 1260 days with six revenue milestones every 180 days and a
# seasonal demand with a mild upward trend. Three variants:
#
# * `synthetic_basic.json`: no value weights; milestones front-load revenue
#   and bind for the optimal policy;
# * `synthetic_discount.json`: money loses 8% of its value per year;
# * `synthetic_uplift.json`: willingness to pay grows 10% per year of
#   construction.
#
# The weighted variants use looser milestones (70% of the revenue reachable
# at the revenue-maximizing price) so that the comparison with value-blind
# planning is driven by the weight, not by a planner missing its targets.

save_scenario(synthetic_scenario(name="synthetic-basic"), OUT / "synthetic_basic.json")

loose = (0.7,) * 6
discount = ValueWeight("exponential", rate=math.log(1.08) / 365)
save_scenario(
    synthetic_scenario(phi=discount, revenue_fractions=loose, name="synthetic-discount"),
    OUT / "synthetic_discount.json",
)
uplift = ValueWeight("linear", slope=0.1 / 365)
save_scenario(
    synthetic_scenario(kappa=uplift, revenue_fractions=loose, name="synthetic-uplift"),
    OUT / "synthetic_uplift.json",
)

for path in sorted(OUT.glob("*.json")):
    print("wrote", path.relative_to(OUT.parent))
