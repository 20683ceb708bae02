import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from price_opt import (
    DemandCurve,
    DomainError,
    InfeasibleError,
    LinearPropensity,
    RangeError,
    ScenarioError,
    TabulatedPropensity,
    ValueWeight,
    integrate_I,
    integrate_J,
    integrate_K,
    invert_revenue_rate,
    invert_sales_rate,
    propensity_eval,
)
from price_opt.functions import propensity_from_dict, simpson

from fuzz import exp_table, linear_table

TRIANGLE = DemandCurve([0.0, 2.0], [2.0, 0.0])


def trapezoid_oracle(f, t1, t2, n=10**6):
    t = np.linspace(t1, t2, n + 1)
    return float(np.trapezoid(f(t), t)) if hasattr(np, "trapezoid") else float(np.trapz(f(t), t))


# -- demand ----------------------------------------------------------------


def test_K_constant_rate():
    assert integrate_K(DemandCurve.constant(1.0, 10.0), 0, 10) == pytest.approx(10.0, rel=1e-15)


def test_K_triangle():
    assert integrate_K(TRIANGLE, 0, 2) == pytest.approx(2.0, rel=1e-15)
    assert integrate_K(TRIANGLE, 0, 1) == pytest.approx(1.5, rel=1e-15)


def test_K_empty_interval_is_zero():
    assert integrate_K(TRIANGLE, 0.7, 0.7) == 0.0


def test_K_out_of_range():
    with pytest.raises(RangeError):
        integrate_K(TRIANGLE, 0.0, 2.5)
    with pytest.raises(RangeError):
        integrate_K(TRIANGLE, -0.1, 1.0)
    with pytest.raises(RangeError):
        integrate_K(TRIANGLE, 1.5, 1.0)


@given(st.lists(st.floats(0, 5), min_size=2, max_size=8), st.lists(st.floats(0, 1), min_size=3, max_size=3))
def test_K_additive(rates, cuts):
    T = 7.0
    d = DemandCurve(np.linspace(0, T, len(rates)), rates)
    t1, t2, t3 = sorted(c * T for c in cuts)
    whole = integrate_K(d, t1, t3)
    parts = integrate_K(d, t1, t2) + integrate_K(d, t2, t3)
    assert whole == pytest.approx(parts, rel=1e-12, abs=1e-12)


def test_K_matches_quad():
    d = DemandCurve([0, 1, 3, 4], [1.0, 3.0, 0.5, 2.0])
    ref, _ = integrate.quad(lambda t: float(d(t)), 0.3, 3.7, points=[1, 3], epsabs=0, epsrel=1e-13)
    assert integrate_K(d, 0.3, 3.7) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize(
    "times, rates",
    [([0.1, 1.0], [1, 1]), ([0, 1, 1], [1, 1, 1]), ([0, 1], [1, -1]), ([0], [1])],
)
def test_demand_validation(times, rates):
    with pytest.raises(ScenarioError):
        DemandCurve(times, rates)


# -- weights ---------------------------------------------------------------


def test_weight_forms():
    t = np.array([0.0, 1.0, 2.0])
    np.testing.assert_allclose(ValueWeight.exponential(0.5)(t), np.exp(-0.5 * t))
    np.testing.assert_allclose(ValueWeight.linear(0.1)(t), 1 + 0.1 * t)
    np.testing.assert_allclose(ValueWeight.constant(2.0)(t), 2.0)
    w = ValueWeight.sampled([[0, 1], [1, 2], [1, 3], [2, 3]])
    assert float(w(1.0, "left")) == 2.0
    assert float(w(1.0, "right")) == 3.0
    assert float(w(0.5)) == 1.5


def test_weight_identity_and_product():
    one = ValueWeight.constant()
    assert one.is_identity
    e = ValueWeight.exponential(0.1)
    assert (one * e) is e
    assert (ValueWeight.constant(2) * ValueWeight.constant(3)).params["c"] == 6
    p = e * ValueWeight.linear(0.2)
    assert float(p(1.0)) == pytest.approx(math.exp(-0.1) * 1.2)


def test_weight_roundtrip_dict():
    for w in (ValueWeight.exponential(0.01), ValueWeight.linear(0.002), ValueWeight.sampled([[0, 1], [5, 2]])):
        assert ValueWeight.from_dict(w.to_dict()) == w


def test_weight_rejects_unknown_form_and_bad_values():
    with pytest.raises(ScenarioError):
        ValueWeight("cosine")
    with pytest.raises(DomainError):
        ValueWeight.constant(0.0)
    with pytest.raises(DomainError):
        ValueWeight.sampled([[0, 1], [1, -1]])


# -- I and J -----------------------------------------------------------------


def test_identity_weight_reduces_to_K():
    rng = np.random.default_rng(1)
    d = DemandCurve(np.linspace(0, 10, 7), rng.uniform(0, 3, 7))
    one = ValueWeight.constant()
    for _ in range(100):
        t1, t2 = sorted(rng.uniform(0, 10, 2))
        K = integrate_K(d, t1, t2)
        assert integrate_I(d, one, t1, t2) == pytest.approx(K, rel=1e-12)
        assert integrate_J(d, one, t1, t2) == pytest.approx(K, rel=1e-12)


def test_I_J_exponential_closed_form():
    d = DemandCurve.constant(1.0, 1.0)
    w = ValueWeight.exponential(1.0)
    assert integrate_I(d, w, 0, 1) == pytest.approx(math.e - 1, rel=1e-9)
    assert integrate_J(d, w, 0, 1) == pytest.approx(1 - math.exp(-1), rel=1e-9)


def test_I_triangle_against_trapezoid_oracle():
    w = ValueWeight.exponential(0.1)
    ref = trapezoid_oracle(lambda t: (2 - t) * np.exp(0.1 * t), 0, 2)
    assert integrate_I(TRIANGLE, w, 0, 2) == pytest.approx(ref, rel=1e-8)


def test_J_triangle_against_trapezoid_oracle():
    w = ValueWeight.linear(-0.1)
    ref = trapezoid_oracle(lambda t: (2 - t) * (1 - 0.1 * t), 0, 2)
    assert integrate_J(TRIANGLE, w, 0, 2) == pytest.approx(ref, rel=1e-8)


def test_I_J_with_jumps_against_quad():
    d = DemandCurve([0, 1.3, 4], [1.0, 2.0, 0.5])
    w = ValueWeight.piecewise_constant([0, 0.7, 2.2, 4], [1.0, 0.5, 1.5]) * ValueWeight.exponential(0.2)
    pts = [0.7, 1.3, 2.2]
    refI, _ = integrate.quad(lambda t: float(d(t) / w(t)), 0.2, 3.9, points=pts, epsabs=0, epsrel=1e-13)
    refJ, _ = integrate.quad(lambda t: float(d(t) * w(t)), 0.2, 3.9, points=pts, epsabs=0, epsrel=1e-13)
    assert integrate_I(d, w, 0.2, 3.9) == pytest.approx(refI, rel=1e-9)
    assert integrate_J(d, w, 0.2, 3.9) == pytest.approx(refJ, rel=1e-9)


def test_step_weight_integrates_exactly():
    # piece ends must not drift across a jump through rounding
    e1, e2 = 0.0980592009516836, 0.42323443591643456
    d = DemandCurve.constant(1.0, 1.0)
    w = ValueWeight.piecewise_constant([0.0, e1, e2, 1.0], [0.84, 0.76, 0.82])
    assert integrate_I(d, w, 0.0, e2) == pytest.approx(e1 / 0.84 + (e2 - e1) / 0.76, rel=1e-13)
    calls = []

    def f(t, side):
        calls.append(1)
        return w(t, side)

    simpson(f, np.array([0.0, e1, e2]))
    assert len(calls) <= 6


def test_nonpositive_weight_is_domain_error():
    d = DemandCurve.constant(1.0, 20.0)
    with pytest.raises(DomainError):
        integrate_I(d, ValueWeight.linear(-0.1), 0, 20)


# -- propensity --------------------------------------------------------------


def test_linear_eval_and_clamp():
    v = LinearPropensity(1, 1)
    assert propensity_eval(v, 0.6) == pytest.approx(0.4)
    assert propensity_eval(v, 2.0) == 0.0
    assert propensity_eval(LinearPropensity(1.5, 1), 0.1) == 1.0
    with pytest.raises(DomainError):
        propensity_eval(v, -1.0)


@pytest.mark.parametrize("a, b", [(0, 1), (2, 1), (1, 0), (-1, 1)])
def test_linear_parameter_validation(a, b):
    with pytest.raises(ScenarioError, match="propensity"):
        LinearPropensity(a, b)


def test_linear_star_quantities():
    v = LinearPropensity(0.8, 0.002)
    assert v.p_star == pytest.approx(200.0)
    assert v.p_bar == pytest.approx(400.0)
    assert v.v_star == pytest.approx(0.4)
    assert v.v_star < 1


def test_invert_sales_rate_linear():
    v = LinearPropensity(1, 1)
    assert invert_sales_rate(v, 0.4) == pytest.approx(0.6)
    assert invert_sales_rate(v, 0.5) == pytest.approx(0.5)
    with pytest.raises(InfeasibleError):
        invert_sales_rate(v, 0.51)
    with pytest.raises(DomainError):
        invert_sales_rate(v, 0.0)


def test_invert_sales_rate_table():
    v = linear_table(1.0, 1.0)
    assert invert_sales_rate(v, 0.37) == pytest.approx(0.63, abs=1e-8)


def test_invert_revenue_rate_linear():
    v = LinearPropensity(1, 1)
    assert invert_revenue_rate(v, 0.24) == pytest.approx(0.6)
    assert invert_revenue_rate(v, 0.25) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(InfeasibleError):
        invert_revenue_rate(v, 0.26)
    with pytest.raises(DomainError):
        invert_revenue_rate(v, -0.1)


def test_invert_revenue_rate_table_picks_upper_root():
    v = linear_table(1.0, 1.0)
    p = invert_revenue_rate(v, 0.24)
    assert p == pytest.approx(0.6, abs=1e-9)


@settings(max_examples=200)
@given(st.floats(0.3, 1.9), st.floats(0.1, 10), st.floats(1e-6, 1.0))
def test_inverse_round_trips(a, b, frac):
    v = LinearPropensity(a, b)
    target = frac * v.v_star
    p = invert_sales_rate(v, target)
    assert p >= v.p_star - 1e-12
    assert abs(float(v(p)) - target) <= 1e-9
    x = frac * v.max_revenue_rate
    p = invert_revenue_rate(v, x)
    assert p >= v.p_star - 1e-12
    assert abs(p * float(v(p)) - x) <= 1e-9 * max(1.0, x)


@settings(max_examples=100)
@given(st.floats(0.3, 3.0), st.floats(1e-4, 1.0))
def test_table_inverse_round_trips(scale, frac):
    v = exp_table(scale)
    p = invert_sales_rate(v, frac * v.v_star)
    assert abs(float(v(p)) - frac * v.v_star) <= 1e-9
    x = frac * v.max_revenue_rate
    p = invert_revenue_rate(v, x)
    assert p >= v.p_star - 1e-12
    assert abs(p * float(v(p)) - x) <= 1e-9 * max(1.0, x)


def test_table_p_star_and_tail():
    v = exp_table(1.0, n=200, span=4.0)
    assert v.p_star == pytest.approx(1.0, abs=5e-3)
    assert math.isinf(v.p_bar)
    # the tail keeps the revenue rate falling
    p = np.array([4.0, 8.0, 16.0])
    r = p * v(p)
    assert np.all(np.diff(r) < 0)


@pytest.mark.parametrize(
    "points",
    [
        [[0, 1.0], [1, 0.5], [2, 0.6]],  # increasing fraction
        [[0, 0.0], [1, 0.0]],  # nobody ever buys
        [[0, 0.5], [1, 1.2]],  # out of [0, 1]
        [[1, 0.5], [1, 0.4]],  # repeated price
        # revenue rate rises again past p*
        [[0, 1.0], [1, 0.5], [2, 0.2], [3, 0.19], [6, 0.0]],
    ],
)
def test_table_validation(points):
    with pytest.raises(ScenarioError):
        TabulatedPropensity(points)


def test_propensity_dict_roundtrip():
    for v in (LinearPropensity(0.8, 0.002), linear_table(1, 1, n=11)):
        assert propensity_from_dict(v.to_dict()) == v
