"""Optimal policy under a time-varying value weight, linear propensity.

With ``v(p) = a - b p`` and objective weight ``zeta``, the revenue-optimal
price for a fixed sales (or revenue) target on an interval is

    p_q(t) = (a/b - q / zeta(t)) / 2,    q <= 0,

with the multiplier ``q`` fixed by the target through the interval integrals
``K = int demand``, ``I = int demand/zeta`` and ``J = int demand*zeta``.
Larger ``q`` means lower prices everywhere, so the most stringent future
bound is the one with the largest multiplier.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from .errors import DomainError, InfeasibleError
from .functions import LinearPropensity, integrate_I, integrate_J, integrate_K
from .policy import Candidate, ConstantPrice, PricingPolicy, Segment, SolveTrace, TraceStep, TvmSegment, tvm_price
from .scenario import Scenario, residuals
from .solver_basic import STOCK_RTOL, TIE_RTOL, ZERO_RTOL, _require_feasible, cap_price

log = logging.getLogger(__name__)


def _linear(s: Scenario) -> LinearPropensity:
    if not isinstance(s.propensity, LinearPropensity):
        raise DomainError("the multiplier closed form needs a linear propensity")
    return s.propensity


def _q_clamp(q, v):
    # round-off can push a zero multiplier slightly positive
    if 0 < q <= 1e-12 * max(1.0, v.a / v.b):
        return 0.0
    return q


def _q_sales(v, K, I, residual, interval=None, index=None):
    q = (2 * residual - v.a * K) / (v.b * I)
    q = _q_clamp(q, v)
    if q > 0:
        raise InfeasibleError(
            f"selling {residual:.6g} on {interval} exceeds the p* capacity {v.a * K / 2:.6g}",
            interval=interval,
            kind="sales",
            index=index,
        )
    return q


def _q_revenue(v, J, I, residual, interval=None, index=None):
    disc = v.a**2 * J - 4 * residual * v.b
    if disc < 0:
        if disc < -1e-12 * v.a**2 * J:
            raise InfeasibleError(
                f"earning {residual:.6g} on {interval} exceeds the p* maximum {v.a**2 * J / (4 * v.b):.6g}",
                interval=interval,
                kind="revenue",
                index=index,
            )
        disc = 0.0
    return -math.sqrt(disc / (v.b**2 * I))


def q_sales(s: Scenario, t_i: float, t_k: float, residual_S: float) -> float:
    """Multiplier of the revenue-maximizing price that sells ``residual_S`` on ``[t_i, t_k]``."""
    v = _linear(s)
    if residual_S < 0:
        raise DomainError("sales residual must be non-negative")
    K = integrate_K(s.demand, t_i, t_k)
    I = integrate_I(s.demand, s.zeta, t_i, t_k)
    return _q_sales(v, K, I, residual_S, (t_i, t_k))


def q_revenue(s: Scenario, t_i: float, t_k: float, residual_R: float) -> float:
    """Multiplier of the sales-minimizing price that earns ``residual_R`` on ``[t_i, t_k]``."""
    v = _linear(s)
    if residual_R < 0:
        raise DomainError("revenue residual must be non-negative")
    J = integrate_J(s.demand, s.zeta, t_i, t_k)
    I = integrate_I(s.demand, s.zeta, t_i, t_k)
    return _q_revenue(v, J, I, residual_R, (t_i, t_k))


def price_from_q(s: Scenario, q: float, t: float, side: str = "right") -> tuple[float, float]:
    """``(internal_price, posted_price)`` at time ``t`` for multiplier ``q``."""
    v = _linear(s)
    if q > 0:
        raise DomainError(f"multiplier must be <= 0, got {q}")
    z = float(s.zeta(t, side))
    if not z > 0:
        raise DomainError("zeta must be positive")
    p = float(tvm_price(v, q, z))
    return p, float(s.kappa(t, side)) * p


def propensity_from_q(s: Scenario, q: float, t: float, side: str = "right") -> float:
    v = _linear(s)
    return 0.5 * (v.a + q * v.b / float(s.zeta(t, side)))


def interval_totals(s: Scenario, q: float, t_i: float, t_k: float) -> tuple[float, float]:
    """Sales and objective revenue delivered by ``p_q`` on ``[t_i, t_k]``."""
    v = _linear(s)
    K = integrate_K(s.demand, t_i, t_k)
    I = integrate_I(s.demand, s.zeta, t_i, t_k)
    J = integrate_J(s.demand, s.zeta, t_i, t_k)
    return 0.5 * (v.a * K + q * v.b * I), v.a**2 / (4 * v.b) * J - q * q * v.b / 4 * I


def solve_interval_max_revenue(s: Scenario, t_i: float, t_k: float, sales_target: float) -> Segment:
    """Revenue-maximizing segment on ``[t_i, t_k]`` selling exactly ``sales_target``."""
    return Segment(float(t_i), float(t_k), TvmSegment(q_sales(s, t_i, t_k, sales_target)))


def solve_interval_min_sales(s: Scenario, t_i: float, t_k: float, revenue_target: float) -> Segment:
    """Sales-minimizing segment on ``[t_i, t_k]`` earning exactly ``revenue_target``."""
    return Segment(float(t_i), float(t_k), TvmSegment(q_revenue(s, t_i, t_k, revenue_target)))


class _IntervalTables:
    """Cumulative K, I, J at the constraint grid, built once per solve."""

    def __init__(self, s: Scenario):
        taus = s.taus
        self.K = s.demand.cumulative(taus)
        I = [0.0]
        J = [0.0]
        for t0, t1 in zip(taus[:-1], taus[1:]):
            I.append(I[-1] + integrate_I(s.demand, s.zeta, t0, t1))
            J.append(J[-1] + integrate_J(s.demand, s.zeta, t0, t1))
        self.I = np.asarray(I)
        self.J = np.asarray(J)

    def between(self, i, k):
        return (
            float(self.K[k] - self.K[i]),
            float(self.I[k] - self.I[i]),
            float(self.J[k] - self.J[i]),
        )


def _min_zeta(s, t0, t1):
    z = s.zeta
    t = np.unique(np.concatenate([np.linspace(t0, t1, 257), z.breakpoints]))
    t = t[(t >= t0) & (t <= t1)]
    return float(min(np.min(z(t, "right")), np.min(z(t, "left"))))


def solve_tvm_linear(s: Scenario):
    """Optimal policy under ``zeta = phi * kappa`` for a linear propensity.

    Each segment carries a multiplier; its internal price is
    ``(a/b - q/zeta(t)) / 2`` and its posted price ``kappa(t)`` times that.
    Returns ``(policy, trace)``.
    """
    v = _linear(s)
    _require_feasible(s)
    sched = s.schedule
    taus = sched.taus
    tables = _IntervalTables(s)
    stock = sched.total_stock

    segments = []
    trace = SolveTrace(solver="tvm-linear")
    i = 0
    sold = 0.0
    earned = 0.0
    while i < sched.k:
        res = residuals(s, sold, earned, i)
        cands = []
        for k, rs, rr in res:
            K, I, J = tables.between(i, k)
            interval = (float(taus[i]), float(taus[k]))
            if rs > ZERO_RTOL * max(1.0, sched.min_sales[k]):
                cands.append(Candidate(k, "sales", _q_sales(v, K, I, rs, interval, k)))
            if rr > ZERO_RTOL * max(1.0, sched.min_revenue[k]):
                cands.append(Candidate(k, "revenue", _q_revenue(v, J, I, rr, interval, k)))
        if not cands:
            p = cap_price(s)
            segments.append(Segment(float(taus[i]), float(taus[-1]), ConstantPrice(p)))
            trace.steps.append(TraceStep(float(taus[i]), float(taus[-1]), i, sched.k, "none", (), tuple(res)))
            break
        q = max(c.value for c in cands)
        tol = TIE_RTOL * max(abs(q), 1e-12 * v.a / v.b)
        binding = max((c for c in cands if c.value >= q - tol), key=lambda c: (c.k, c.kind == "sales"))
        j = binding.k
        # the closed form assumes a - b p >= 0 along the whole segment
        if q < -v.a * _min_zeta(s, taus[i], taus[j]) / v.b * (1 + 1e-12):
            raise InfeasibleError(
                f"multiplier {q:.6g} on [{taus[i]:g}, {taus[j]:g}] prices above a/b, "
                "outside the linear branch",
                interval=(float(taus[i]), float(taus[j])),
                kind=binding.kind,
                index=j,
            )
        K, I, J = tables.between(i, j)
        sold += 0.5 * (v.a * K + q * v.b * I)
        earned += v.a**2 / (4 * v.b) * J - q * q * v.b / 4 * I
        if sold > stock * (1 + STOCK_RTOL):
            raise InfeasibleError(
                f"meeting the {binding.kind} bound at t={taus[j]:g} sells {sold:.6g} > stock {stock:.6g}",
                interval=(float(taus[i]), float(taus[j])),
                kind="stock",
                index=j,
            )
        segments.append(Segment(float(taus[i]), float(taus[j]), TvmSegment(q)))
        trace.steps.append(TraceStep(float(taus[i]), float(taus[j]), i, j, binding.kind, tuple(cands), tuple(res)))
        log.debug("segment [%g, %g) q=%.12g bound by %s at %d", taus[i], taus[j], q, binding.kind, j)
        i = j
    return PricingPolicy(tuple(segments), label="optimal"), trace
