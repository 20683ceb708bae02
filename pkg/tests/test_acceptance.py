"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -s -v``; the summary
lines are printed even without ``-s``.
"""

import json
import time
from pathlib import Path

import numpy as np
import pytest

from price_opt import (
    ConstraintSchedule,
    DemandCurve,
    LinearPropensity,
    Scenario,
    baseline_nearest_constraint,
    baseline_value_blind,
    cumulative_at_grid,
    integrate_K,
    load_scenario,
    q_revenue,
    q_sales,
    simulate,
    solve_basic,
    solve_interval_max_revenue,
    solve_interval_min_sales,
    solve_tvm_linear,
    tight_revenue_price,
    tight_sales_price,
)
from price_opt.oracle import GridSearchSpec, best_piecewise_constant, best_piecewise_q
from price_opt.solver_tvm import interval_totals

from fuzz import (
    aligned_smooth_scenario,
    basic_scenario,
    random_demand,
    random_propensity,
    random_smooth_weight,
    random_linear,
    tvm_scenario,
)

SCEN = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")

    return emit


_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)


def _quad(f, t0, t1, points):
    """64-point Gauss-Legendre on every smooth piece; ``f`` is vectorised."""
    edges = np.unique(np.concatenate([[t0, t1], [x for x in points if t0 < x < t1]]))
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        h = 0.5 * (b - a)
        total += h * float(np.dot(_GL_W, f(a + h * (_GL_X + 1))))
    return total


def _rel(x, target):
    return abs(x - target) / abs(target)


# -- 1 ---------------------------------------------------------------------------


def test_criterion_01_closed_form_round_trips(report):
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(500):
        T = float(rng.uniform(1.0, 20.0))
        demand = random_demand(rng, T)
        lam = demand
        bps = demand.breakpoints

        # constant-price inversions on a zeta == 1 interval
        v = random_propensity(rng, table_prob=0.5)
        s = Scenario(T, demand, v, ConstraintSchedule.build(T, 1.0))
        K = integrate_K(demand, 0.0, T)
        S = float(rng.uniform(0.05, 1.0)) * v.v_star * K
        R = float(rng.uniform(0.05, 1.0)) * v.max_revenue_rate * K
        p_s = tight_sales_price(s, 0.0, T, S)
        p_r = tight_revenue_price(s, 0.0, T, R)
        vs, vr = float(v(p_s)), float(v(p_r))
        worst = max(worst, _rel(_quad(lambda t: vs * lam(t), 0.0, T, bps), S))
        worst = max(worst, _rel(_quad(lambda t: p_r * vr * lam(t), 0.0, T, bps), R))

        # multiplier inversions under a time-varying weight
        lv = random_linear(rng)
        w = random_smooth_weight(rng, T)
        sw = Scenario(T, demand, lv, ConstraintSchedule.build(T, 1.0), phi=w)
        zeta = sw.zeta
        zb = np.concatenate([bps, zeta.breakpoints])
        zmin = float(zeta(np.linspace(0, T, 257)).min())
        q0 = -float(rng.uniform(0.0, 0.9)) * lv.a * zmin / lv.b
        S, R = interval_totals(sw, q0, 0.0, T)
        price = lambda q, t: 0.5 * (lv.a / lv.b - q / zeta(t))
        qs = q_sales(sw, 0.0, T, S)
        qr = q_revenue(sw, 0.0, T, R)
        sales = _quad(lambda t: lv(price(qs, t)) * lam(t), 0.0, T, zb)
        rev = _quad(lambda t: zeta(t) * price(qr, t) * lv(price(qr, t)) * lam(t), 0.0, T, zb)
        worst = max(worst, _rel(sales, S), _rel(rev, R))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-8 and elapsed < 10
    report(1, ok, f"worst relative error {worst:.2e} over 500 instances, {elapsed:.1f} s")
    assert worst <= 1e-8
    assert elapsed < 10


# -- 2 ---------------------------------------------------------------------------


def test_criterion_02_reduction_identity(report):
    rng = np.random.default_rng(102)
    start = time.perf_counter()
    worst = 0.0
    same_breaks = True
    for _ in range(200):
        s = basic_scenario(rng)  # linear propensity, zeta == 1
        pb, _ = solve_basic(s)
        pt, _ = solve_tvm_linear(s)
        same_breaks &= np.array_equal(pb.breakpoints, pt.breakpoints)
        for seg in pt.segments:
            t = np.linspace(seg.t_start, seg.t_end, 7)[1:-1]
            worst = max(worst, float(np.max(np.abs(pt.internal_price(s, t) - pb.internal_price(s, t)))))
    elapsed = time.perf_counter() - start
    ok = same_breaks and worst <= 1e-8 and elapsed < 30
    report(2, ok, f"max price gap {worst:.2e}, breakpoints identical: {same_breaks}, {elapsed:.1f} s")
    assert same_breaks
    assert worst <= 1e-8
    assert elapsed < 30


# -- 3 ---------------------------------------------------------------------------


def test_criterion_03_oracle_basic(report):
    rng = np.random.default_rng(103)
    step = 1e-3
    start = time.perf_counter()
    worst_excess, worst_gap, far = -np.inf, 0.0, []
    for n in range(50):
        a = float(rng.uniform(0.6, 1.4))
        # p* = 0.5 and p_bar = 1, so the full admissible range is a 501-point grid
        s = basic_scenario(rng, int(rng.integers(1, 4)), propensity=LinearPropensity(a, a))
        policy, _ = solve_basic(s)
        _, rev = cumulative_at_grid(s, policy)
        res = best_piecewise_constant(s, GridSearchSpec(0.5, 1.0, step, max_evaluations=2 * 10**8))
        assert res.feasible
        excess = res.revenue - rev[-1]
        worst_excess = max(worst_excess, excess)
        # the solver merges intervals sharing a price; compare interval by interval
        mids = 0.5 * (s.taus[1:] + s.taus[:-1])
        gap = float(np.max(np.abs(np.array(res.values) - policy.internal_price(s, mids))))
        worst_gap = max(worst_gap, gap)
        if gap > step * (1 + 1e-9):
            far.append((n, s.schedule.n_intervals, round(gap / step, 1), excess))
    elapsed = time.perf_counter() - start
    ok = worst_excess <= 1e-3 and not far and elapsed < 300
    report(
        3,
        ok,
        f"max oracle excess {worst_excess:.2e}; argmax more than one step away on {len(far)}/50 "
        f"(worst {worst_gap / step:.1f} steps), {elapsed:.1f} s",
    )
    assert worst_excess <= 1e-3
    assert elapsed < 300
    # On a finite grid a tight sales equality is generally not representable:
    # the best feasible grid point trades price between intervals along a
    # direction where revenue is flat to second order, and lands several
    # steps from the continuous optimum while earning less than it.
    assert not far, f"(instance, intervals, distance in steps, revenue excess): {far}"


# -- 4 ---------------------------------------------------------------------------


def test_criterion_04_oracle_tvm(report):
    rng = np.random.default_rng(104)
    start = time.perf_counter()
    worst = -np.inf
    for _ in range(20):
        s = tvm_scenario(rng, int(rng.integers(1, 3)), weight="steps")
        policy, _ = solve_tvm_linear(s)
        _, rev = cumulative_at_grid(s, policy)
        v = s.propensity
        grid = np.linspace(0, s.horizon, 1025)
        zmax = float(max(s.zeta(grid, side).max() for side in ("left", "right")))
        res = best_piecewise_q(s, GridSearchSpec(-v.a * zmax / v.b, 0.0, 1e-3))
        assert res.feasible
        worst = max(worst, res.revenue - rev[-1])
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-4 and elapsed < 300
    report(4, ok, f"max oracle excess {worst:.2e}, {elapsed:.1f} s")
    assert worst <= 1e-4
    assert elapsed < 300


# -- 5 ---------------------------------------------------------------------------


def test_criterion_05_structural_invariants(report):
    rng = np.random.default_rng(105)
    start = time.perf_counter()
    failures = []
    for n in range(1000):
        s = basic_scenario(rng, table_prob=0.3)
        sched = s.schedule
        policy, trace = solve_basic(s)
        p = np.array(policy.prices())
        sales, rev = cumulative_at_grid(s, policy)
        tol_s = 1e-8 * np.maximum(1.0, sched.min_sales)
        tol_r = 1e-8 * np.maximum(1.0, sched.min_revenue)
        checks = {
            "constant segments": all(type(g.form).__name__ == "ConstantPrice" for g in policy.segments),
            "breakpoints on grid": set(policy.breakpoints) <= set(s.taus),
            "non-decreasing": bool(np.all(np.diff(p) >= -1e-12 * p[1:])),
            "sales bounds": bool(np.all(sales >= sched.min_sales - tol_s)),
            "revenue bounds": bool(np.all(rev >= sched.min_revenue - tol_r)),
            "sells out": abs(sales[-1] - s.total_stock) <= 1e-8 * max(1.0, s.total_stock),
        }
        for step in trace.steps:
            k = step.binding_index
            got, bound, tol = (
                (sales[k], sched.min_sales[k], tol_s[k]) if step.binding_kind == "sales" else (rev[k], sched.min_revenue[k], tol_r[k])
            )
            checks.setdefault("binding tight", True)
            checks["binding tight"] &= abs(got - bound) <= tol
        failures += [(n, name) for name, good in checks.items() if not good]
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 60
    report(5, ok, f"{len(failures)} invariant failures over 1000 instances, {elapsed:.1f} s")
    assert not failures, failures[:10]
    assert elapsed < 60


# -- 6 ---------------------------------------------------------------------------


def reshape_demand(rng, s: Scenario) -> DemandCurve:
    """A different demand curve with the same integral over every constraint interval."""
    taus = s.taus
    L = np.diff(taus)
    K = np.array([integrate_K(s.demand, t0, t1) for t0, t1 in zip(taus[:-1], taus[1:])])
    avg = K / L
    cap = np.minimum(np.concatenate([[avg[0]], avg]), np.concatenate([avg, [avg[-1]]]))
    d = rng.uniform(0.0, 1.0, len(taus)) * cap
    t, y = [0.0], [d[0]]
    for j in range(len(L)):
        m = taus[j] + rng.uniform(0.1, 0.9) * L[j]
        # trapezoids on [tau_j, m] and [m, tau_{j+1}] integrate to K_j
        peak = (2 * K[j] - (m - taus[j]) * d[j] - (taus[j + 1] - m) * d[j + 1]) / L[j]
        t += [m, taus[j + 1]]
        y += [peak, d[j + 1]]
    return DemandCurve(np.array(t), np.array(y))


def test_criterion_06_averaging_invariance(report):
    rng = np.random.default_rng(106)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        s = basic_scenario(rng, table_prob=0.3)
        other = s.replace(demand=reshape_demand(rng, s))
        p0 = np.array(solve_basic(s)[0].prices())
        p1 = np.array(solve_basic(other)[0].prices())
        assert len(p0) == len(p1)
        worst = max(worst, float(np.max(np.abs(p0 - p1))))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 30
    report(6, ok, f"max price change {worst:.2e} over 100 reshaped demands, {elapsed:.1f} s")
    assert worst <= 1e-10
    assert elapsed < 30


# -- 7 ---------------------------------------------------------------------------


def test_criterion_07_euler_lagrange_residual(report):
    rng = np.random.default_rng(107)
    start = time.perf_counter()
    worst = 0.0
    for n in range(200):
        s = tvm_scenario(rng, weight="smooth" if n % 2 else "steps")
        policy, _ = solve_tvm_linear(s)
        v = s.propensity
        for seg in policy.segments:
            t = np.linspace(seg.t_start, seg.t_end, 102)[1:-1]
            p = policy.internal_price(s, t, "right")
            z = s.zeta(t, "right")
            residual = v(p) / v.derivative(p) + p + seg.form.q / z
            worst = max(worst, float(np.max(np.abs(residual))))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 30
    report(7, ok, f"max residual {worst:.2e} at 100 points per segment, 200 solves, {elapsed:.1f} s")
    assert worst <= 1e-10
    assert elapsed < 30


# -- 8 ---------------------------------------------------------------------------


def test_criterion_08_synthetic_orderings(report):
    start = time.perf_counter()
    basic = load_scenario(SCEN / "synthetic_basic.json")
    discount = load_scenario(SCEN / "synthetic_discount.json")
    uplift = load_scenario(SCEN / "synthetic_uplift.json")
    for s in (basic, discount, uplift):
        assert s.synthetic
        assert s.horizon == 1260 and s.total_stock == 1000
        assert np.allclose(s.taus, np.arange(0, 1261, 180))
        assert np.all(s.schedule.min_revenue[1:7] > 0)
    raw = json.loads((SCEN / "synthetic_basic.json").read_text())
    assert raw["synthetic"] is True

    # (a) optimal vs nearest-constraint
    opt = simulate(basic, solve_basic(basic)[0])
    near = simulate(basic, baseline_nearest_constraint(basic))
    da = opt.final_objective_revenue / near.final_objective_revenue - 1
    a_ok = da > 0 and near.min_slack >= -1e-6 * near.final_objective_revenue

    # (b) decreasing phi: aware vs phi-blind, with sales dominance inside (0, T)
    aware = simulate(discount, solve_tvm_linear(discount)[0])
    blind = simulate(discount, baseline_value_blind(discount, "phi"))
    db = aware.final_objective_revenue / blind.final_objective_revenue - 1
    inside = (aware.t > 0) & (aware.t < discount.horizon)
    dominates = bool(np.all(aware.cum_sales[inside] > blind.cum_sales[inside]))
    b_ok = db > 0 and dominates

    # (c) increasing kappa: aware vs kappa-blind
    aware_k = simulate(uplift, solve_tvm_linear(uplift)[0])
    blind_k = simulate(uplift, baseline_value_blind(uplift, "kappa"))
    dc = aware_k.final_objective_revenue / blind_k.final_objective_revenue - 1
    c_ok = dc > 0

    elapsed = time.perf_counter() - start
    ok = a_ok and b_ok and c_ok and elapsed < 60
    report(
        8,
        ok,
        f"(a) {da:+.4%} vs nearest  (b) {db:+.4%} vs phi-blind, sales dominate: {dominates}  "
        f"(c) {dc:+.4%} vs kappa-blind  [synthetic data, magnitudes informational], {elapsed:.1f} s",
    )
    assert a_ok and b_ok and c_ok
    assert elapsed < 60


# -- 9 ---------------------------------------------------------------------------


def test_criterion_09_second_order_convergence(report):
    rng = np.random.default_rng(109)
    start = time.perf_counter()
    ratios = []
    for _ in range(10):
        s = aligned_smooth_scenario(rng)
        policy, _ = solve_tvm_linear(s)
        R = [simulate(s, policy, dt).final_objective_revenue for dt in (0.1, 0.05, 0.025)]
        ratios.append((R[0] - R[1]) / (R[1] - R[2]))
    elapsed = time.perf_counter() - start
    ratios = np.array(ratios)
    ok = bool(np.all((ratios >= 3.5) & (ratios <= 4.5))) and elapsed < 60
    report(9, ok, f"error ratios in [{ratios.min():.4f}, {ratios.max():.4f}] over 10 scenarios, {elapsed:.1f} s")
    assert np.all((ratios >= 3.5) & (ratios <= 4.5)), ratios
    assert elapsed < 60


# -- 10 --------------------------------------------------------------------------


def test_criterion_10_duality(report):
    rng = np.random.default_rng(110)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(500):
        s = tvm_scenario(rng, 1, weight="smooth" if rng.random() < 0.5 else "steps", q_depth=0.95)
        T = s.horizon
        t0, t1 = sorted(rng.uniform(0, T, 2))
        if t1 - t0 < 0.01 * T:
            t0, t1 = 0.0, T
        zmin = float(min(s.zeta(np.linspace(t0, t1, 257), side).min() for side in ("left", "right")))
        v = s.propensity
        cap = v.a * zmin / v.b
        S, _ = interval_totals(s, -float(rng.uniform(0.0, 0.95)) * cap, t0, t1)
        q = solve_interval_max_revenue(s, t0, t1, S).form.q
        _, R = interval_totals(s, q, t0, t1)
        back = solve_interval_min_sales(s, t0, t1, R).form.q
        worst = max(worst, abs(back - q) / max(1.0, abs(q)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 10
    report(10, ok, f"max q round-trip error {worst:.2e} over 500 intervals, {elapsed:.1f} s")
    assert worst <= 1e-9
    assert elapsed < 10
