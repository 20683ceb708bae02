# coding: utf-8

# # Money today is worth more than money tomorrow
#
# With a decreasing weight `phi(t)` on revenue the optimal price is no longer
# flat within an interval. For a linear propensity `v(p) = a - b p` the price
# on a segment is
#
#     p(t) = (a/b - q / zeta(t)) / 2,      q <= 0,
#
# where `zeta = phi * kappa` and `q` is one number per segment. As `zeta`
# falls, `-q / zeta` grows and the price rises: sell cheaply while money is
# valuable, charge more later.
#
#     python3 demos/03_time_value.py

from pathlib import Path

import numpy as np

from price_opt import baseline_value_blind, compare, load_scenario, simulate, solve_tvm_linear

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "demos" / "out"
OUT.mkdir(exist_ok=True)

# ## A single stock target
#
# 300 units over 1000 days with `phi(t) = exp(-t / 1000)`.

s = load_scenario(ROOT / "scenarios" / "discount_single_stock.json")
policy, _ = solve_tvm_linear(s)
q = policy.segments[0].form.q
t = np.linspace(0, s.horizon, 6)
print(f"q = {q:.6f}")
print("price at", t, "->", np.round(policy.internal_price(s, t), 4))

aware = simulate(s, policy, dt=0.5)
blind = simulate(s, baseline_value_blind(s, "phi"), dt=0.5)
inside = (aware.t > 0) & (aware.t < s.horizon)
print("aware sells ahead of blind at every interior time:", bool(np.all(aware.cum_sales[inside] > blind.cum_sales[inside])))
print(compare([aware, blind]).format())

# ## The synthetic schedule with discounting
#
# About 8% a year, with the six revenue milestones. The blind policy plans
# as if `phi == 1` and is scored under the real discounting.

s = load_scenario(ROOT / "scenarios" / "synthetic_discount.json")
aware = simulate(s, solve_tvm_linear(s)[0])
blind = simulate(s, baseline_value_blind(s, "phi"))
print(compare([aware, blind]).format())
(OUT / "03_aware.csv").write_text(aware.to_csv())
(OUT / "03_blind.csv").write_text(blind.to_csv())
