# coding: utf-8

# # Looking one constraint ahead is not enough
#
# A natural heuristic prices each interval to meet only the *next*
# constraint (or, once that is already satisfied, to spread the remaining
# stock evenly over the rest of the horizon). It is feasible but myopic: it
# cannot see that a later milestone will force a steep discount, so it sells
# too expensively early and too cheaply late.
#
#     python3 demos/02_nearest_baseline.py

from pathlib import Path

from price_opt import baseline_nearest_constraint, compare, load_scenario, simulate, solve_basic

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "demos" / "out"
OUT.mkdir(exist_ok=True)

s = load_scenario(ROOT / "scenarios" / "synthetic_basic.json")

optimal = simulate(s, solve_basic(s)[0])
nearest = simulate(s, baseline_nearest_constraint(s))

# ## Price paths
#
# The optimal path is non-decreasing; the heuristic's is not.

for name, run in (("optimal", optimal), ("nearest", nearest)):
    idx = [int(i) for i in (0, len(run.t) // 4, len(run.t) // 2, 3 * len(run.t) // 4, len(run.t) - 1)]
    print(f"{name:>8}:", " ".join(f"{run.internal_price[i]:.4f}" for i in idx))

# ## Final revenue
#
# The demand here is synthetic, so the size of the gap is illustrative only;
# the sign is what the theory predicts.

report = compare([optimal, nearest])
print(report.format())

(OUT / "02_compare.csv").write_text(report.to_csv())
(OUT / "02_optimal.csv").write_text(optimal.to_csv())
(OUT / "02_nearest.csv").write_text(nearest.to_csv())
