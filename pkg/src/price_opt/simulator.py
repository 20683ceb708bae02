"""Forward simulation of pricing policies, baseline policies, comparisons."""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleError, ScenarioError
from .functions import ValueWeight, integrate_J, integrate_K
from .policy import ConstantPrice, PricingPolicy, Segment, TvmSegment, tvm_price
from .scenario import Scenario
from .solver_basic import ZERO_RTOL, STOCK_RTOL, _revenue_price, _sales_price, cap_price
from .solver_tvm import solve_tvm_linear

CSV_COLUMNS = ("t", "posted_price", "internal_price", "cum_sales", "cum_nominal_revenue", "cum_objective_revenue")


@dataclass
class SimulationResult:
    t: np.ndarray
    posted_price: np.ndarray
    internal_price: np.ndarray
    cum_sales: np.ndarray
    cum_nominal_revenue: np.ndarray
    cum_objective_revenue: np.ndarray
    dt: float
    sales_slack: np.ndarray  # at each constraint time
    revenue_slack: np.ndarray
    scenario_id: str
    label: str = ""
    synthetic: bool = False

    @property
    def final_sales(self) -> float:
        return float(self.cum_sales[-1])

    @property
    def final_objective_revenue(self) -> float:
        return float(self.cum_objective_revenue[-1])

    @property
    def final_nominal_revenue(self) -> float:
        return float(self.cum_nominal_revenue[-1])

    @property
    def min_slack(self) -> float:
        return float(min(self.sales_slack.min(), self.revenue_slack.min()))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        cols = (self.t, self.posted_price, self.internal_price, self.cum_sales,
                self.cum_nominal_revenue, self.cum_objective_revenue)
        for row in zip(*cols):
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue()


def _time_grid(s: Scenario, policy: PricingPolicy, dt: float) -> np.ndarray:
    T = s.horizon
    n = max(1, int(math.ceil(T / dt - 1e-9)))
    extra = [policy.breakpoints, s.taus, s.demand.breakpoints, s.zeta.breakpoints, s.kappa.breakpoints]
    if policy.weight is not None:
        extra.append(policy.weight.breakpoints)
    grid = np.unique(np.concatenate([np.linspace(0.0, T, n + 1)] + extra))
    return grid[(grid >= 0) & (grid <= T)]


def _rates(s: Scenario, policy: PricingPolicy, t, side):
    p = policy.internal_price(s, t, side)
    lam = s.demand(t, side)
    sales = s.propensity(p) * lam
    kappa = s.kappa(t, side)
    phi = s.phi(t, side)
    return p, kappa * p, sales, kappa * p * sales, phi * kappa * p * sales


def simulate(s: Scenario, policy: PricingPolicy, dt: float | None = None) -> SimulationResult:
    """Trapezoidal accumulation of sales and revenue along ``policy``.

    The time grid has step at most ``dt`` (default ``T / 100000``) and
    contains every policy, constraint, demand and weight breakpoint; each
    cell uses one-sided limits so price jumps are integrated exactly.
    """
    if dt is None:
        dt = s.horizon / 100_000
    if not dt > 0:
        raise ScenarioError("dt must be positive", "dt")
    if not policy.covers(s):
        raise ScenarioError(f"policy covers [0, {policy.horizon}), scenario horizon is {s.horizon}", "segments")
    grid = _time_grid(s, policy, dt)
    left = _rates(s, policy, grid[:-1], "right")
    right = _rates(s, policy, grid[1:], "left")
    h = np.diff(grid)
    cums = []
    for k in (2, 3, 4):
        cells = 0.5 * h * (left[k] + right[k])
        cums.append(np.concatenate([[0.0], np.cumsum(cells)]))
    internal = np.concatenate([left[0], right[0][-1:]])
    posted = np.concatenate([left[1], right[1][-1:]])
    idx = np.searchsorted(grid, s.taus)
    sched = s.schedule
    return SimulationResult(
        t=grid,
        posted_price=posted,
        internal_price=internal,
        cum_sales=cums[0],
        cum_nominal_revenue=cums[1],
        cum_objective_revenue=cums[2],
        dt=float(dt),
        sales_slack=cums[0][idx] - sched.min_sales,
        revenue_slack=cums[2][idx] - sched.min_revenue,
        scenario_id=s.fingerprint(),
        label=policy.label,
        synthetic=s.synthetic,
    )


def write_simulation_csv(result: SimulationResult, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(result.to_csv())


# ---------------------------------------------------------------------------
# baselines


def baseline_nearest_constraint(s: Scenario) -> PricingPolicy:
    """Greedy policy meeting only the next grid bound exactly.

    On each interval the price is the lowest of the tight prices for the next
    bound's positive requirements; when the next bound asks for nothing, the
    remaining stock is spread over the rest of the horizon.
    """
    sched = s.schedule
    taus = sched.taus
    v = s.propensity
    stock = sched.total_stock
    zeta = s.zeta
    segs = []
    sold = earned = 0.0
    for i in range(sched.k):
        k = i + 1
        interval = (float(taus[i]), float(taus[k]))
        K = integrate_K(s.demand, *interval)
        J = integrate_J(s.demand, zeta, *interval)
        rs = sched.min_sales[k] - sold
        rr = sched.min_revenue[k] - earned
        prices = []
        if rs > ZERO_RTOL * max(1.0, sched.min_sales[k]):
            prices.append(_sales_price(s, K, rs, interval, k))
        if rr > ZERO_RTOL * max(1.0, sched.min_revenue[k]):
            prices.append(_revenue_price(s, J, rr, interval, k))
        if prices:
            p = float(min(prices))
        elif stock - sold > ZERO_RTOL * max(1.0, stock):
            rest = (float(taus[i]), float(taus[-1]))
            p = _sales_price(s, integrate_K(s.demand, *rest), stock - sold, rest, sched.k)
        else:
            p = cap_price(s)
        vp = float(v(p))
        sold += vp * K
        earned += p * vp * J
        if sold > stock * (1 + STOCK_RTOL):
            raise InfeasibleError(
                f"greedy pricing oversells the stock by t={taus[k]:g}",
                interval=interval,
                kind="stock",
                index=k,
            )
        segs.append(Segment(interval[0], interval[1], ConstantPrice(p)))
    return PricingPolicy(tuple(segs), label="nearest-constraint")


_IGNORE = {"phi": ("phi",), "kappa": ("kappa",), "both": ("phi", "kappa")}


def baseline_value_blind(s: Scenario, ignore: str) -> PricingPolicy:
    """Optimal policy for a copy of ``s`` with ``phi`` and/or ``kappa`` set to one.

    The returned policy keeps the weight it was planned under, so simulating
    it against the true scenario reproduces what the blind planner would do.
    """
    if ignore not in _IGNORE:
        raise ValueError(f"ignore must be one of {sorted(_IGNORE)}, got {ignore!r}")
    blind = s.replace(**{name: ValueWeight.constant() for name in _IGNORE[ignore]})
    policy, _ = solve_tvm_linear(blind)
    label = f"{ignore}-blind"
    zeta_b = blind.zeta
    if zeta_b.is_constant:
        segs = tuple(
            Segment(g.t_start, g.t_end, ConstantPrice(float(tvm_price(s.propensity, g.form.q, zeta_b.params["c"]))))
            if isinstance(g.form, TvmSegment)
            else g
            for g in policy.segments
        )
        return PricingPolicy(segs, label=label)
    return PricingPolicy(policy.segments, weight=zeta_b, label=label)


# ---------------------------------------------------------------------------
# comparison


@dataclass
class ComparisonReport:
    labels: list
    final_objective_revenue: list
    final_nominal_revenue: list
    final_sales: list
    deltas: list = field(default_factory=list)  # (label_i, label_j, relative delta of i over j)
    slacks: dict = field(default_factory=dict)  # label -> (sales slacks, revenue slacks)
    synthetic: bool = False

    def delta(self, a: str, b: str) -> float:
        for x, y, d in self.deltas:
            if (x, y) == (a, b):
                return d
            if (x, y) == (b, a):
                return (1 + d) ** -1 - 1
        raise KeyError((a, b))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["policy", "final_objective_revenue", "final_nominal_revenue", "final_sales", "min_slack"])
        for j, lab in enumerate(self.labels):
            ss, rs = self.slacks[lab]
            w.writerow([lab, repr(self.final_objective_revenue[j]), repr(self.final_nominal_revenue[j]),
                        repr(self.final_sales[j]), repr(float(min(ss.min(), rs.min())))])
        w.writerow([])
        w.writerow(["policy_a", "policy_b", "relative_delta"])
        for a, b, d in self.deltas:
            w.writerow([a, b, repr(d)])
        return buf.getvalue()

    def format(self) -> str:
        lines = []
        if self.synthetic:
            lines.append("(synthetic demand)")
        for j, lab in enumerate(self.labels):
            lines.append(f"{lab:>24}: objective revenue {self.final_objective_revenue[j]:.8g}, "
                         f"sales {self.final_sales[j]:.8g}")
        for a, b, d in self.deltas:
            lines.append(f"{a} vs {b}: {100 * d:+.4f}%")
        return "\n".join(lines) + "\n"


def compare(results) -> ComparisonReport:
    """Final revenues, pairwise relative deltas and slacks of simulations of one scenario."""
    results = list(results)
    if len(results) < 2:
        raise ScenarioError("need at least two simulation results", "results")
    if len({r.scenario_id for r in results}) != 1:
        raise ScenarioError("results come from different scenarios", "results")
    labels = []
    for j, r in enumerate(results):
        lab = r.label or f"policy{j}"
        while lab in labels:
            lab += "'"
        labels.append(lab)
    obj = [r.final_objective_revenue for r in results]
    deltas = [
        (labels[i], labels[j], (obj[i] - obj[j]) / abs(obj[j]) if obj[j] else math.inf)
        for i, j in itertools.combinations(range(len(results)), 2)
    ]
    return ComparisonReport(
        labels=labels,
        final_objective_revenue=obj,
        final_nominal_revenue=[r.final_nominal_revenue for r in results],
        final_sales=[r.final_sales for r in results],
        deltas=deltas,
        slacks={lab: (r.sales_slack, r.revenue_slack) for lab, r in zip(labels, results)},
        synthetic=any(r.synthetic for r in results),
    )
