# coding: utf-8

# # Objects that gain value while they wait
#
# If the object itself becomes more valuable over time (construction
# progresses, the neighbourhood develops), the posted price is
# `kappa(t) * p(t)` and customers respond to the internal price `p`. An
# increasing `kappa` plays the opposite role of discounting: it rewards
# selling later, and the optimal internal price *falls* within a segment.
#
#     python3 demos/04_value_growth.py

from pathlib import Path

import numpy as np

from price_opt import baseline_value_blind, compare, load_scenario, simulate, solve_tvm_linear

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "demos" / "out"
OUT.mkdir(exist_ok=True)

s = load_scenario(ROOT / "scenarios" / "synthetic_uplift.json")
policy, trace = solve_tvm_linear(s)
print(trace.format())

t = np.array([0.0, 300.0, 600.0, 900.0, 1200.0])
print("internal:", np.round(policy.internal_price(s, t), 4))
print("posted:  ", np.round(policy.posted_price(s, t), 4))

# ## Ignoring the uplift
#
# The blind policy plans with `kappa == 1` and then applies the uplift to
# its flat internal prices when posting them.

aware = simulate(s, policy)
blind = simulate(s, baseline_value_blind(s, "kappa"))
both = simulate(s, baseline_value_blind(s, "both"))
print(compare([aware, blind, both]).format())
(OUT / "04_aware.csv").write_text(aware.to_csv())
