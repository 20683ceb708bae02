"""Optimization instances: constraint schedule, scenario, feasibility checks.

Revenue requirements are expressed in objective money, i.e. revenue weighted
by ``zeta = phi * kappa``. With both weights equal to one this is plain
revenue.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import RangeError, ScenarioError
from .functions import (
    DemandCurve,
    LinearPropensity,
    Propensity,
    ValueWeight,
    integrate_J,
    integrate_K,
    propensity_from_dict,
)

SCHEMA_VERSION = 1
FEAS_RTOL = 1e-9


class ConstraintSchedule:
    """Cumulative lower bounds on sales and objective revenue on a time grid.

    ``taus[0] == 0`` and ``taus[-1] == T``. The bounds at ``taus[0]`` are zero
    and the last sales bound equals ``total_stock``.
    """

    def __init__(self, taus, min_sales, min_revenue, total_stock):
        taus = np.asarray(taus, dtype=float)
        min_sales = np.asarray(min_sales, dtype=float)
        min_revenue = np.asarray(min_revenue, dtype=float)
        if not (taus.shape == min_sales.shape == min_revenue.shape) or len(taus) < 2:
            raise ScenarioError("taus, min_sales, min_revenue must align and hold >= 2 entries", "constraints")
        if taus[0] != 0 or np.any(np.diff(taus) <= 0):
            raise ScenarioError("constraint times must start at 0 and strictly increase", "constraints")
        if min_sales[0] != 0 or min_revenue[0] != 0:
            raise ScenarioError("constraints at t=0 must be trivial", "constraints")
        if np.any(min_sales < 0) or np.any(min_revenue < 0):
            raise ScenarioError("bounds must be non-negative", "constraints")
        if not total_stock > 0:
            raise ScenarioError("must be positive", "total_stock")
        if min_sales[-1] != total_stock:
            raise ScenarioError("last sales bound must equal the total stock", "constraints")
        if np.any(min_sales > total_stock * (1 + FEAS_RTOL)):
            raise ScenarioError("sales bounds cannot exceed the total stock", "constraints")
        for arr in (taus, min_sales, min_revenue):
            arr.setflags(write=False)
        self.taus = taus
        self.min_sales = min_sales
        self.min_revenue = min_revenue
        self.total_stock = float(total_stock)

    @classmethod
    def build(cls, horizon: float, total_stock: float, constraints: Sequence = ()) -> "ConstraintSchedule":
        """Assemble a schedule from ``(tau, min_sales, min_revenue)`` triples.

        ``None`` bounds become 0. The grid point ``0`` is added, and ``T`` is
        added or has its sales bound set to ``total_stock``.
        """
        rows = {0.0: [0.0, 0.0]}
        for tau, s, r in constraints:
            tau = float(tau)
            if not 0 < tau <= horizon:
                raise ScenarioError(f"constraint time {tau} outside (0, {horizon}]", "constraints.tau")
            if tau in rows:
                raise ScenarioError(f"duplicate constraint time {tau}", "constraints.tau")
            rows[tau] = [0.0 if s is None else float(s), 0.0 if r is None else float(r)]
        last = rows.setdefault(float(horizon), [0.0, 0.0])
        if last[0] > total_stock * (1 + FEAS_RTOL):
            raise ScenarioError("final sales bound exceeds the total stock", "constraints.min_sales")
        last[0] = float(total_stock)
        taus = sorted(rows)
        return cls(taus, [rows[t][0] for t in taus], [rows[t][1] for t in taus], total_stock)

    @property
    def k(self) -> int:
        """Index of the last grid point."""
        return len(self.taus) - 1

    @property
    def n_intervals(self) -> int:
        return len(self.taus) - 1

    def __eq__(self, other):
        return (
            isinstance(other, ConstraintSchedule)
            and self.total_stock == other.total_stock
            and np.array_equal(self.taus, other.taus)
            and np.array_equal(self.min_sales, other.min_sales)
            and np.array_equal(self.min_revenue, other.min_revenue)
        )

    __hash__ = None

    def __repr__(self):
        return f"ConstraintSchedule(taus={self.taus.tolist()}, S={self.total_stock:g})"


@dataclass(frozen=True, eq=False)
class Scenario:
    """Complete pricing instance on ``[0, horizon]``."""

    horizon: float
    demand: DemandCurve
    propensity: Propensity
    schedule: ConstraintSchedule
    phi: ValueWeight = field(default_factory=ValueWeight.constant)
    kappa: ValueWeight = field(default_factory=ValueWeight.constant)
    name: str = ""
    synthetic: bool = False

    def __post_init__(self):
        if self.demand.horizon != self.horizon:
            raise ScenarioError("demand must be defined on exactly [0, horizon]", "demand")
        if self.schedule.taus[-1] != self.horizon:
            raise ScenarioError("last constraint time must equal the horizon", "constraints")
        t = np.unique(np.concatenate([np.linspace(0, self.horizon, 1025), self.zeta.breakpoints]))
        t = t[(t >= 0) & (t <= self.horizon)]
        if np.any(self.zeta(t, "left") <= 0) or np.any(self.zeta(t, "right") <= 0):
            raise ScenarioError("phi * kappa must be positive on [0, horizon]", "phi")

    @property
    def zeta(self) -> ValueWeight:
        return self.phi * self.kappa

    @property
    def total_stock(self) -> float:
        return self.schedule.total_stock

    @property
    def taus(self) -> np.ndarray:
        return self.schedule.taus

    @property
    def is_basic(self) -> bool:
        """True when the objective weight is identically one."""
        return self.zeta.is_identity

    def replace(self, **changes) -> "Scenario":
        from dataclasses import replace

        return replace(self, **changes)

    def to_dict(self) -> dict:
        sched = self.schedule
        cons = [
            {"tau": float(t), "min_sales": float(s), "min_revenue": float(r)}
            for t, s, r in zip(sched.taus[1:], sched.min_sales[1:], sched.min_revenue[1:])
        ]
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "synthetic": self.synthetic,
            "horizon_days": self.horizon,
            "total_stock": sched.total_stock,
            "demand": self.demand.to_points(),
            "phi": self.phi.to_dict(),
            "kappa": self.kappa.to_dict(),
            "propensity": self.propensity.to_dict(),
            "constraints": cons,
        }

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


# ---------------------------------------------------------------------------
# JSON


def _number(d, key, where=None):
    name = key if where is None else f"{where}.{key}"
    if key not in d:
        raise ScenarioError("missing field", name)
    val = d[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise ScenarioError(f"expected a finite number, got {val!r}", name)
    return float(val)


def scenario_from_dict(d: dict) -> Scenario:
    if not isinstance(d, dict):
        raise ScenarioError("scenario must be a JSON object")
    version = d.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema_version {version!r}", "schema_version")
    horizon = _number(d, "horizon_days")
    stock = _number(d, "total_stock")
    if "demand" not in d or not isinstance(d["demand"], list):
        raise ScenarioError("expected a list of {t, rate}", "demand")
    try:
        pts = [(_number(p, "t", "demand"), _number(p, "rate", "demand")) for p in d["demand"]]
    except TypeError:
        raise ScenarioError("expected a list of {t, rate}", "demand") from None
    demand = DemandCurve([p[0] for p in pts], [p[1] for p in pts])
    phi = ValueWeight.from_dict(d.get("phi", {"form": "constant", "params": {"c": 1.0}}))
    kappa = ValueWeight.from_dict(d.get("kappa", {"form": "constant", "params": {"c": 1.0}}))
    if "propensity" not in d:
        raise ScenarioError("missing field", "propensity")
    propensity = propensity_from_dict(d["propensity"])
    rows = []
    for c in d.get("constraints", []):
        if not isinstance(c, dict):
            raise ScenarioError("expected objects", "constraints")
        tau = _number(c, "tau", "constraints")
        s = c.get("min_sales")
        r = c.get("min_revenue")
        s = None if s is None else _number(c, "min_sales", "constraints")
        r = None if r is None else _number(c, "min_revenue", "constraints")
        rows.append((tau, s, r))
    schedule = ConstraintSchedule.build(horizon, stock, rows)
    return Scenario(
        horizon=horizon,
        demand=demand,
        propensity=propensity,
        schedule=schedule,
        phi=phi,
        kappa=kappa,
        name=str(d.get("name", "")),
        synthetic=bool(d.get("synthetic", False)),
    )


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read scenario file {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON in {path}: {exc.msg} (line {exc.lineno})") from None
    return scenario_from_dict(data)


def save_scenario(scenario: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario.to_dict(), indent=2) + "\n")


# ---------------------------------------------------------------------------
# feasibility


@dataclass(frozen=True)
class Violation:
    index: int
    kind: str  # "sales", "revenue", "stock" or "demand"
    required: float
    capacity: float

    def __str__(self):
        return f"grid index {self.index} ({self.kind}): requires {self.required:.6g}, at most {self.capacity:.6g} reachable"


@dataclass(frozen=True)
class FeasibilityReport:
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "feasible"
        return "infeasible:\n" + "\n".join(f"  {v}" for v in self.violations)


def check_feasibility(s: Scenario) -> FeasibilityReport:
    """Check that pricing at ``p*`` meets every bound, given unlimited stock."""
    v = s.propensity
    sched = s.schedule
    zeta = s.zeta
    out = []
    taus = sched.taus
    for i in range(1, len(taus)):
        if integrate_K(s.demand, taus[i - 1], taus[i]) <= 0:
            out.append(Violation(i, "demand", 0.0, 0.0))
    for i in range(1, len(taus)):
        cap_s = v.v_star * integrate_K(s.demand, 0.0, taus[i])
        req = sched.min_sales[i]
        if i < sched.k and req > cap_s * (1 + FEAS_RTOL):
            out.append(Violation(i, "sales", req, cap_s))
        cap_r = v.max_revenue_rate * integrate_J(s.demand, zeta, 0.0, taus[i])
        if sched.min_revenue[i] > cap_r * (1 + FEAS_RTOL):
            out.append(Violation(i, "revenue", float(sched.min_revenue[i]), cap_r))
    cap_total = v.v_star * integrate_K(s.demand, 0.0, s.horizon)
    if sched.total_stock > cap_total * (1 + FEAS_RTOL):
        out.append(Violation(sched.k, "stock", sched.total_stock, cap_total))
    return FeasibilityReport(tuple(out))


def residuals(s: Scenario, acquired_sales: float, acquired_revenue: float, i: int):
    """Outstanding ``(k, sales, revenue)`` requirements for every ``k > i``."""
    sched = s.schedule
    if not 0 <= i < sched.k:
        raise RangeError(f"grid index must lie in [0, {sched.k}), got {i}")
    out = []
    for k in range(i + 1, sched.k + 1):
        out.append(
            (
                k,
                max(float(sched.min_sales[k]) - acquired_sales, 0.0),
                max(float(sched.min_revenue[k]) - acquired_revenue, 0.0),
            )
        )
    return out


# ---------------------------------------------------------------------------
# synthetic instance standing in for historical demand


def synthetic_demand(horizon: float = 1260.0, base_rate: float = 3.0) -> DemandCurve:
    """Seasonal arrival rate with a mild upward trend, sampled daily."""
    f = lambda t: base_rate * (1 + 0.3 * np.sin(2 * np.pi * t / 365.0)) * (1 + 0.1 * t / horizon)
    return DemandCurve.from_function(f, horizon, int(round(horizon)))


def synthetic_scenario(
    phi: ValueWeight | None = None,
    kappa: ValueWeight | None = None,
    *,
    horizon: float = 1260.0,
    total_stock: float = 1000.0,
    base_rate: float = 3.0,
    a: float = 0.8,
    b: float = 0.002,
    revenue_fractions: Sequence[float] = (0.9, 0.92, 0.9, 0.88, 0.87, 0.86),
    spacing: float = 180.0,
    name: str = "synthetic",
) -> Scenario:
    """Instance with six revenue milestones every ``spacing`` days.

    Each milestone demands ``fraction`` of the objective revenue that
    constant pricing at ``p*`` would have collected by then. The default
    fractions front-load revenue so that the early milestones bind. Demand
    is synthetic, so the instance is flagged as such.
    """
    phi = phi or ValueWeight.constant()
    kappa = kappa or ValueWeight.constant()
    demand = synthetic_demand(horizon, base_rate)
    v = LinearPropensity(a, b)
    zeta = phi * kappa
    rows = []
    for j, frac in enumerate(revenue_fractions, start=1):
        tau = spacing * j
        cap = v.max_revenue_rate * integrate_J(demand, zeta, 0.0, tau)
        rows.append((tau, None, frac * cap))
    schedule = ConstraintSchedule.build(horizon, total_stock, rows)
    return Scenario(horizon, demand, v, schedule, phi=phi, kappa=kappa, name=name, synthetic=True)
