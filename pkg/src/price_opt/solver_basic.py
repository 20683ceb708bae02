"""Most-stringent-constraint construction of the optimal piecewise-constant price.

From grid point ``tau_i`` every future bound ``k`` yields the constant price
that would meet it exactly; the lowest such price is charged until the
bound that produced it, and the construction restarts there. Only interval
integrals of the demand enter, so the result holds for time-varying demand.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from .errors import DomainError, InfeasibleError
from .functions import integrate_J, integrate_K
from .policy import Candidate, ConstantPrice, PricingPolicy, Segment, SolveTrace, TraceStep
from .scenario import Scenario, check_feasibility, residuals

log = logging.getLogger(__name__)

TIE_RTOL = 1e-12
ZERO_RTOL = 1e-9
STOCK_RTOL = 1e-9


def tight_sales_price(s: Scenario, t_i: float, t_k: float, residual_sales: float) -> float | None:
    """Constant price selling exactly ``residual_sales`` on ``[t_i, t_k]``.

    Returns ``None`` for a zero residual (no requirement to meet).
    """
    if residual_sales <= 0:
        return None
    K = integrate_K(s.demand, t_i, t_k)
    return _sales_price(s, K, residual_sales, (t_i, t_k))


def tight_revenue_price(s: Scenario, t_i: float, t_k: float, residual_revenue: float) -> float | None:
    """Constant price ``>= p*`` earning exactly ``residual_revenue`` on ``[t_i, t_k]``.

    Revenue is weighted by ``zeta``, which is one in the basic model.
    """
    if residual_revenue <= 0:
        return None
    J = integrate_J(s.demand, s.zeta, t_i, t_k)
    return _revenue_price(s, J, residual_revenue, (t_i, t_k))


def _sales_price(s, K, residual, interval, index=None):
    if K <= 0:
        raise InfeasibleError(f"no demand on {interval}", interval=interval, kind="sales", index=index)
    try:
        return s.propensity.invert_sales_rate(residual / K)
    except InfeasibleError:
        raise InfeasibleError(
            f"selling {residual:.6g} on [{interval[0]:g}, {interval[1]:g}] needs a price below p*",
            interval=interval,
            kind="sales",
            index=index,
        ) from None


def _revenue_price(s, J, residual, interval, index=None):
    if J <= 0:
        raise InfeasibleError(f"no demand on {interval}", interval=interval, kind="revenue", index=index)
    try:
        return s.propensity.invert_revenue_rate(residual / J)
    except InfeasibleError:
        raise InfeasibleError(
            f"earning {residual:.6g} on [{interval[0]:g}, {interval[1]:g}] exceeds the p* maximum",
            interval=interval,
            kind="revenue",
            index=index,
        ) from None


def cap_price(s: Scenario) -> float:
    """Price used once nothing more may be sold."""
    v = s.propensity
    if math.isfinite(v.p_bar):
        return v.p_bar
    return float(v.prices[-1]) * 1e8


def _require_feasible(s: Scenario):
    report = check_feasibility(s)
    if not report.ok:
        first = report.violations[0]
        raise InfeasibleError(
            f"scenario violates feasibility assumptions: {report}",
            kind="assumption",
            index=first.index,
            violations=report.violations,
        )


def _argmax_rate(s, required, acquired, i):
    taus = s.taus
    k = np.arange(i + 1, len(taus))
    rates = (required[k] - acquired) / (taus[k] - taus[i])
    if not np.any(rates > 0):
        return None
    return int(k[np.argmax(rates)])


def solve_basic(s: Scenario):
    """Optimal piecewise-constant policy for a scenario with ``zeta == 1``.

    Returns ``(policy, trace)``. Raises ``InfeasibleError`` when the scenario
    fails the feasibility assumptions or turns out over-constrained.
    """
    if not s.is_basic:
        raise DomainError("solve_basic needs phi * kappa == 1; use solve_tvm_linear")
    _require_feasible(s)
    sched = s.schedule
    taus = sched.taus
    cumK = s.demand.cumulative(taus)
    const_demand = bool(np.all(s.demand.rates == s.demand.rates[0]))
    v = s.propensity
    stock = sched.total_stock

    segments = []
    trace = SolveTrace(solver="basic")
    i = 0
    sold = 0.0
    earned = 0.0
    while i < sched.k:
        res = residuals(s, sold, earned, i)
        cands = []
        for k, rs, rr in res:
            K = float(cumK[k] - cumK[i])
            interval = (float(taus[i]), float(taus[k]))
            if rs > ZERO_RTOL * max(1.0, sched.min_sales[k]):
                cands.append(Candidate(k, "sales", _sales_price(s, K, rs, interval, k)))
            if rr > ZERO_RTOL * max(1.0, sched.min_revenue[k]):
                cands.append(Candidate(k, "revenue", _revenue_price(s, K, rr, interval, k)))
        if not cands:
            p = cap_price(s)
            log.info("all requirements met at t=%g; pricing at %g to the horizon", taus[i], p)
            segments.append(Segment(float(taus[i]), float(taus[-1]), ConstantPrice(p)))
            trace.steps.append(TraceStep(float(taus[i]), float(taus[-1]), i, sched.k, "none", (), tuple(res)))
            break
        p = min(c.value for c in cands)
        binding = max(
            (c for c in cands if c.value <= p * (1 + TIE_RTOL)),
            key=lambda c: (c.k, c.kind == "sales"),
        )
        j = binding.k
        K = float(cumK[j] - cumK[i])
        vp = float(v(p))
        sold += vp * K
        earned += p * vp * K
        if sold > stock * (1 + STOCK_RTOL):
            raise InfeasibleError(
                f"meeting the {binding.kind} bound at t={taus[j]:g} sells {sold:.6g} > stock {stock:.6g}",
                interval=(float(taus[i]), float(taus[j])),
                kind="stock",
                index=j,
            )
        segments.append(Segment(float(taus[i]), float(taus[j]), ConstantPrice(p)))
        step = TraceStep(
            float(taus[i]),
            float(taus[j]),
            i,
            j,
            binding.kind,
            tuple(cands),
            tuple(res),
            _argmax_rate(s, sched.min_sales, sold - vp * K, i) if const_demand else None,
            _argmax_rate(s, sched.min_revenue, earned - p * vp * K, i) if const_demand else None,
        )
        trace.steps.append(step)
        log.debug("segment [%g, %g) price %.12g bound by %s at %d", taus[i], taus[j], p, binding.kind, j)
        i = j
    return PricingPolicy(tuple(segments), label="optimal"), trace
