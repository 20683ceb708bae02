"""Exhaustive grid search over per-interval policies, for certifying solvers.

Every assignment of one grid value per constraint interval is scored with
closed-form interval totals. The stock is treated as an upper bound on total
sales: on a finite grid exact sell-out is generally unreachable, and for
prices at or above ``p*`` selling less never earns more, so the optimum is
unchanged.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, OracleLimitError
from .functions import LinearPropensity, integrate_I, integrate_J, integrate_K
from .policy import ConstantPrice, PricingPolicy, Segment, TvmSegment
from .scenario import Scenario

FEAS_RTOL = 1e-9


@dataclass(frozen=True)
class GridSearchSpec:
    lo: float
    hi: float
    step: float
    max_evaluations: int = 10**8

    def __post_init__(self):
        if not self.step > 0:
            raise DomainError("grid step must be positive")
        if not self.hi >= self.lo:
            raise DomainError("grid needs hi >= lo")

    def values(self) -> np.ndarray:
        n = int(math.floor((self.hi - self.lo) / self.step + 1e-9)) + 1
        return self.lo + self.step * np.arange(n)

    @classmethod
    def parse(cls, text: str) -> "GridSearchSpec":
        """From ``"min,max,step"``."""
        try:
            lo, hi, step = (float(x) for x in text.split(","))
        except ValueError:
            raise DomainError(f"grid must be 'min,max,step', got {text!r}") from None
        return cls(lo, hi, step)


@dataclass(frozen=True)
class OracleResult:
    policy: PricingPolicy | None
    revenue: float
    values: tuple  # per-interval grid value of the best assignment
    evaluations: int

    @property
    def feasible(self) -> bool:
        return self.policy is not None


def _search(s: Scenario, grids, sales, revenue):
    """Best feasible assignment; ``sales[j]``/``revenue[j]`` are tables over ``grids[j]``."""
    sched = s.schedule
    m = len(grids)
    total = math.prod(len(g) for g in grids)
    tol_s = FEAS_RTOL * np.maximum(1.0, sched.min_sales)
    tol_r = FEAS_RTOL * np.maximum(1.0, sched.min_revenue)
    lo_s = sched.min_sales - tol_s
    lo_r = sched.min_revenue - tol_r
    cap = sched.total_stock + tol_s[-1]
    lo_s[-1] = -math.inf  # the stock is a cap here, not a sell-out requirement

    best = -math.inf
    best_idx = None
    lead = m - min(m, 2)
    tail = m - lead
    for prefix in itertools.product(*(range(len(g)) for g in grids[:lead])):
        cs, cr = 0.0, 0.0
        ok = True
        for j, ix in enumerate(prefix):
            cs += sales[j][ix]
            cr += revenue[j][ix]
            if cs < lo_s[j + 1] or cr < lo_r[j + 1] or cs > cap:
                ok = False
                break
        if not ok:
            continue
        mask = np.ones((1,) * tail, dtype=bool)
        cs_arr = np.asarray(cs)
        cr_arr = np.asarray(cr)
        for d in range(tail):
            j = lead + d
            shape = [1] * tail
            shape[d] = -1
            cs_arr = cs_arr + sales[j].reshape(shape)
            cr_arr = cr_arr + revenue[j].reshape(shape)
            mask = mask & (cs_arr >= lo_s[j + 1]) & (cr_arr >= lo_r[j + 1])
        mask = mask & (cs_arr <= cap)
        if not mask.any():
            continue
        scores = np.where(mask, cr_arr, -np.inf)
        flat = int(np.argmax(scores))
        val = float(scores.flat[flat])
        if val > best:
            best = val
            best_idx = tuple(prefix) + tuple(int(x) for x in np.unravel_index(flat, scores.shape))
    return best, best_idx, total


def _check_size(grids, spec):
    total = math.prod(len(g) for g in grids)
    if total > spec.max_evaluations:
        raise OracleLimitError(f"{total} assignments exceed the limit of {spec.max_evaluations}")


def best_piecewise_constant(s: Scenario, spec: GridSearchSpec) -> OracleResult:
    """Best constant price per constraint interval, basic model, at most 3 intervals."""
    sched = s.schedule
    if sched.n_intervals > 3:
        raise DomainError("price oracle handles at most 3 intervals")
    if not s.is_basic:
        raise DomainError("price oracle needs phi * kappa == 1")
    prices = spec.values()
    grids = [prices] * sched.n_intervals
    _check_size(grids, spec)
    v = s.propensity(prices)
    taus = sched.taus
    sales, revenue = [], []
    for t0, t1 in zip(taus[:-1], taus[1:]):
        K = integrate_K(s.demand, t0, t1)
        sales.append(v * K)
        revenue.append(prices * v * K)
    best, idx, n = _search(s, grids, sales, revenue)
    if idx is None:
        return OracleResult(None, -math.inf, (), n)
    vals = tuple(float(prices[i]) for i in idx)
    segs = tuple(Segment(float(a), float(b), ConstantPrice(p)) for a, b, p in zip(taus[:-1], taus[1:], vals))
    return OracleResult(PricingPolicy(segs, label="oracle"), best, vals, n)


def best_piecewise_q(s: Scenario, spec: GridSearchSpec) -> OracleResult:
    """Best multiplier per constraint interval, linear propensity, at most 2 intervals.

    Grid values that would price above ``a/b`` somewhere on an interval are
    dropped for that interval.
    """
    sched = s.schedule
    if sched.n_intervals > 2:
        raise DomainError("multiplier oracle handles at most 2 intervals")
    v = s.propensity
    if not isinstance(v, LinearPropensity):
        raise DomainError("multiplier oracle needs a linear propensity")
    qs = spec.values()
    qs = qs[qs <= 0]
    taus = sched.taus
    zeta = s.zeta
    grids, sales, revenue = [], [], []
    for t0, t1 in zip(taus[:-1], taus[1:]):
        t = np.unique(np.concatenate([np.linspace(t0, t1, 1025), zeta.breakpoints]))
        t = t[(t >= t0) & (t <= t1)]
        zmin = min(float(zeta(t, "right").min()), float(zeta(t, "left").min()))
        g = qs[qs >= -v.a * zmin / v.b]
        K = integrate_K(s.demand, t0, t1)
        I = integrate_I(s.demand, zeta, t0, t1)
        J = integrate_J(s.demand, zeta, t0, t1)
        grids.append(g)
        sales.append(0.5 * (v.a * K + g * v.b * I))
        revenue.append(v.a**2 / (4 * v.b) * J - g * g * v.b / 4 * I)
    _check_size(grids, spec)
    best, idx, n = _search(s, grids, sales, revenue)
    if idx is None:
        return OracleResult(None, -math.inf, (), n)
    vals = tuple(float(grids[j][i]) for j, i in enumerate(idx))
    segs = tuple(Segment(float(a), float(b), TvmSegment(q)) for a, b, q in zip(taus[:-1], taus[1:], vals))
    return OracleResult(PricingPolicy(segs, label="oracle"), best, vals, n)
