"""Primitive model functions: demand rate, value weights, purchase propensity.

Also holds the quadrature used to integrate demand against a weight:

* ``integrate_K``: integral of the demand rate (closed form),
* ``integrate_I``: integral of demand divided by a weight,
* ``integrate_J``: integral of demand multiplied by a weight.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, InfeasibleError, RangeError, ScenarioError

__all__ = [
    "DemandCurve",
    "ValueWeight",
    "Propensity",
    "LinearPropensity",
    "TabulatedPropensity",
    "integrate_K",
    "integrate_I",
    "integrate_J",
    "simpson",
    "propensity_eval",
    "invert_sales_rate",
    "invert_revenue_rate",
]

QUAD_RTOL = 1e-9
QUAD_MAX_SUBINTERVALS = 2**22
BISECT_MAXITER = 200
_TIME_EPS = 1e-12


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _eval_piecewise_linear(times, values, t, side="right"):
    """Evaluate a piecewise-linear function that may jump at repeated knots.

    ``side="right"`` returns right limits at jumps, ``side="left"`` left limits.
    Values outside the knot range are held constant.
    """
    t = np.asarray(t, dtype=float)
    n = len(times)
    if n == 1:
        return np.full(t.shape, values[0])
    j = np.searchsorted(times, t, side=side) - 1
    j = np.clip(j, 0, n - 2)
    t0, t1 = times[j], times[j + 1]
    y0, y1 = values[j], values[j + 1]
    width = t1 - t0
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(width > 0, (t - t0) / np.where(width > 0, width, 1.0), 1.0)
    frac = np.clip(frac, 0.0, 1.0)
    return y0 + frac * (y1 - y0)


# ---------------------------------------------------------------------------
# demand


class DemandCurve:
    """Deterministic arrival rate of customers, piecewise linear on ``[0, T]``.

    Parameters
    ----------
    times : sequence of float
        Strictly increasing knot times; the first must be 0, the last is the
        horizon ``T``.
    rates : sequence of float
        Non-negative arrival rates (customers/day) at the knots.
    """

    def __init__(self, times: Sequence[float], rates: Sequence[float]):
        times = np.asarray(times, dtype=float)
        rates = np.asarray(rates, dtype=float)
        if times.ndim != 1 or times.shape != rates.shape or len(times) < 2:
            raise ScenarioError("need at least two (t, rate) breakpoints", "demand")
        if times[0] != 0.0:
            raise ScenarioError("first breakpoint must be at t=0", "demand")
        if np.any(np.diff(times) <= 0):
            raise ScenarioError("breakpoint times must be strictly increasing", "demand")
        if np.any(~np.isfinite(rates)) or np.any(rates < 0):
            raise ScenarioError("rates must be finite and non-negative", "demand")
        self.times = _frozen(times)
        self.rates = _frozen(rates)
        # cumulative integral at each knot, trapezoid per linear piece
        cum = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(times) * (rates[1:] + rates[:-1]))])
        self._cum = _frozen(cum)

    @classmethod
    def constant(cls, rate: float, horizon: float) -> "DemandCurve":
        return cls([0.0, horizon], [rate, rate])

    @classmethod
    def from_function(cls, f: Callable[[np.ndarray], np.ndarray], horizon: float, n: int) -> "DemandCurve":
        """Sample ``f`` at ``n + 1`` equally spaced times."""
        t = np.linspace(0.0, horizon, n + 1)
        return cls(t, np.asarray(f(t), dtype=float))

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def breakpoints(self) -> np.ndarray:
        return self.times

    def __call__(self, t, side="right"):
        return _eval_piecewise_linear(self.times, self.rates, t, side)

    rate = __call__

    def cumulative(self, t) -> np.ndarray:
        """``K(0, t)``, exact for the piecewise-linear rate."""
        t = np.asarray(t, dtype=float)
        j = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self.times) - 2)
        dt = t - self.times[j]
        r0 = self.rates[j]
        r1 = self.rates[j + 1]
        slope = (r1 - r0) / (self.times[j + 1] - self.times[j])
        return self._cum[j] + dt * r0 + 0.5 * slope * dt * dt

    def _check_range(self, t1, t2):
        T = self.horizon
        tol = _TIME_EPS * max(1.0, T)
        if not (-tol <= t1 <= t2 + tol and t2 <= T + tol):
            raise RangeError(f"need 0 <= t1 <= t2 <= {T}, got t1={t1}, t2={t2}")

    def to_points(self) -> list[dict]:
        return [{"t": float(t), "rate": float(r)} for t, r in zip(self.times, self.rates)]

    def __eq__(self, other):
        return (
            isinstance(other, DemandCurve)
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.rates, other.rates)
        )

    __hash__ = None

    def __repr__(self):
        return f"DemandCurve(<{len(self.times)} knots>, T={self.horizon:g})"


# ---------------------------------------------------------------------------
# value weights


class ValueWeight:
    """Positive weight of money over time (discounting, development uplift).

    Forms (``params`` keys in parentheses):

    ``constant`` (``c``)
        ``w(t) = c``.
    ``exponential`` (``rate``)
        ``w(t) = exp(-rate * t)``.
    ``linear`` (``slope``)
        ``w(t) = 1 + slope * t``.
    ``sampled`` (``points``)
        Piecewise-linear through ``(t, w)`` points. A repeated time encodes a
        jump; the weight is right-continuous there.
    ``product`` (``factors``)
        Pointwise product of other weights.
    """

    FORMS = ("constant", "exponential", "linear", "sampled", "product")

    def __init__(self, form: str, **params):
        if form not in self.FORMS:
            raise ScenarioError(f"unknown weight form {form!r}", "form")
        self.form = form
        if form == "constant":
            c = float(params.get("c", 1.0))
            if not c > 0:
                raise DomainError("constant weight must be positive")
            self.params = {"c": c}
        elif form == "exponential":
            self.params = {"rate": float(params["rate"])}
        elif form == "linear":
            self.params = {"slope": float(params["slope"])}
        elif form == "sampled":
            pts = np.asarray(params["points"], dtype=float)
            if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 1:
                raise ScenarioError("sampled weight needs [[t, w], ...]", "points")
            if np.any(np.diff(pts[:, 0]) < 0):
                raise ScenarioError("sampled weight times must be non-decreasing", "points")
            if np.any(pts[:, 1] <= 0):
                raise DomainError("sampled weight values must be positive")
            self.params = {"points": tuple(map(tuple, pts.tolist()))}
            self._t = _frozen(pts[:, 0])
            self._w = _frozen(pts[:, 1])
        else:
            self.params = {"factors": tuple(params["factors"])}

    # constructors mirroring the forms
    @classmethod
    def constant(cls, c: float = 1.0) -> "ValueWeight":
        return cls("constant", c=c)

    @classmethod
    def exponential(cls, rate: float) -> "ValueWeight":
        return cls("exponential", rate=rate)

    @classmethod
    def linear(cls, slope: float) -> "ValueWeight":
        return cls("linear", slope=slope)

    @classmethod
    def sampled(cls, points) -> "ValueWeight":
        return cls("sampled", points=points)

    @classmethod
    def piecewise_constant(cls, edges: Sequence[float], values: Sequence[float]) -> "ValueWeight":
        """Step weight equal to ``values[j]`` on ``[edges[j], edges[j+1])``."""
        pts = []
        for j, w in enumerate(values):
            pts.append((edges[j], w))
            pts.append((edges[j + 1], w))
        return cls.sampled(pts)

    def __mul__(self, other: "ValueWeight") -> "ValueWeight":
        if self.is_constant and other.is_constant:
            return ValueWeight.constant(self.params["c"] * other.params["c"])
        if self.is_identity:
            return other
        if other.is_identity:
            return self
        return ValueWeight("product", factors=(self, other))

    @property
    def is_constant(self) -> bool:
        return self.form == "constant"

    @property
    def is_identity(self) -> bool:
        return self.form == "constant" and self.params["c"] == 1.0

    @property
    def breakpoints(self) -> np.ndarray:
        if self.form == "sampled":
            return np.unique(self._t)
        if self.form == "product":
            return np.unique(np.concatenate([f.breakpoints for f in self.params["factors"]] + [np.empty(0)]))
        return np.empty(0)

    def __call__(self, t, side="right"):
        t = np.asarray(t, dtype=float)
        if self.form == "constant":
            return np.full(t.shape, self.params["c"])
        if self.form == "exponential":
            return np.exp(-self.params["rate"] * t)
        if self.form == "linear":
            return 1.0 + self.params["slope"] * t
        if self.form == "sampled":
            return _eval_piecewise_linear(self._t, self._w, t, side)
        out = np.ones(t.shape)
        for f in self.params["factors"]:
            out = out * f(t, side)
        return out

    def to_dict(self) -> dict:
        if self.form == "product":
            raise ScenarioError("product weights are derived, not serialized", "form")
        params = dict(self.params)
        if self.form == "sampled":
            params["points"] = [list(p) for p in params["points"]]
        return {"form": self.form, "params": params}

    @classmethod
    def from_dict(cls, d: dict) -> "ValueWeight":
        if not isinstance(d, dict) or "form" not in d:
            raise ScenarioError("weight must be an object with a 'form'", "form")
        params = d.get("params", {}) or {}
        try:
            return cls(d["form"], **params)
        except KeyError as exc:
            raise ScenarioError(f"missing weight parameter {exc.args[0]!r}", "params") from None

    def __eq__(self, other):
        return isinstance(other, ValueWeight) and self.form == other.form and self.params == other.params

    __hash__ = None

    def __repr__(self):
        if self.form == "sampled":
            return f"ValueWeight.sampled(<{len(self._t)} points>)"
        if self.form == "product":
            return " * ".join(repr(f) for f in self.params["factors"])
        (key, val), = self.params.items()
        return f"ValueWeight.{self.form}({key}={val:g})"


# ---------------------------------------------------------------------------
# quadrature


def simpson(f, edges, rtol: float = QUAD_RTOL, max_subintervals: int = QUAD_MAX_SUBINTERVALS) -> float:
    """Composite Simpson over the pieces ``edges[j]..edges[j+1]``.

    ``f(t, side)`` is evaluated with ``side="right"`` at piece starts and
    ``side="left"`` at piece ends, so jumps at edges are integrated correctly.
    The number of subintervals per piece doubles until two successive
    estimates agree to ``rtol``.
    """
    edges = np.asarray(edges, dtype=float)
    a = edges[:-1, None]
    h_piece = (edges[1:] - edges[:-1])[:, None]
    n_pieces = len(edges) - 1
    if n_pieces == 0:
        return 0.0

    def estimate(n):
        k = np.arange(n + 1)
        x = a + h_piece * (k / n)
        # a + h can miss the piece end by an ulp and cross a jump
        x[:, 0] = edges[:-1]
        x[:, -1] = edges[1:]
        y = np.empty_like(x)
        y[:, 1:-1] = f(x[:, 1:-1], "right")
        y[:, 0] = f(x[:, 0], "right")
        y[:, -1] = f(x[:, -1], "left")
        w = np.ones(n + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return float(np.sum((y @ w) * h_piece[:, 0] / (3.0 * n)))

    n = 2
    prev = estimate(n)
    while True:
        n *= 2
        cur = estimate(n)
        if abs(cur - prev) <= rtol * abs(cur) or cur == prev:
            return cur
        if n * n_pieces >= max_subintervals:
            return cur
        prev = cur


def _piece_edges(demand: DemandCurve, weight: ValueWeight, t1: float, t2: float) -> np.ndarray:
    inner = np.concatenate([demand.breakpoints, weight.breakpoints])
    inner = inner[(inner > t1) & (inner < t2)]
    return np.unique(np.concatenate([[t1, t2], inner]))


def integrate_K(demand: DemandCurve, t1: float, t2: float) -> float:
    """Expected arrivals on ``[t1, t2]``."""
    demand._check_range(t1, t2)
    if t1 == t2:
        return 0.0
    return float(demand.cumulative(t2) - demand.cumulative(t1))


def _weighted_integral(demand, weight, t1, t2, power):
    demand._check_range(t1, t2)
    if t1 == t2:
        return 0.0
    if weight.is_constant:
        return integrate_K(demand, t1, t2) * weight.params["c"] ** power
    edges = _piece_edges(demand, weight, t1, t2)

    def integrand(t, side):
        w = weight(t, side)
        if np.any(w <= 0):
            raise DomainError("value weight must be positive on the integration range")
        return demand(t, side) * w**power

    return simpson(integrand, edges)


def integrate_I(demand: DemandCurve, weight: ValueWeight, t1: float, t2: float) -> float:
    """Integral of ``demand / weight`` over ``[t1, t2]``."""
    return _weighted_integral(demand, weight, t1, t2, -1)


def integrate_J(demand: DemandCurve, weight: ValueWeight, t1: float, t2: float) -> float:
    """Integral of ``demand * weight`` over ``[t1, t2]``."""
    return _weighted_integral(demand, weight, t1, t2, 1)


# ---------------------------------------------------------------------------
# purchase propensity


def _bisect_decreasing(f, target, lo, hi, tol, maxiter=BISECT_MAXITER):
    """Root of ``f(p) = target`` for ``f`` decreasing on ``[lo, hi]``."""
    for _ in range(maxiter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if f(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class Propensity:
    """Fraction of arriving customers willing to buy at a given price.

    Subclasses define ``__call__``, ``derivative``, ``p_star`` and ``p_bar``.
    ``p_bar`` is ``math.inf`` when the propensity never reaches zero.
    """

    p_star: float
    p_bar: float

    def __call__(self, p):
        raise NotImplementedError

    def derivative(self, p):
        raise NotImplementedError

    @property
    def v_star(self) -> float:
        """Propensity at the revenue-maximizing price."""
        return float(self(self.p_star))

    @property
    def max_revenue_rate(self) -> float:
        return self.p_star * self.v_star

    def revenue_rate(self, p):
        return np.asarray(p) * self(p)

    def _bisection_bracket(self, f, target):
        lo = self.p_star
        if math.isfinite(self.p_bar):
            return lo, self.p_bar, 1e-12 * self.p_bar
        hi = max(2.0 * lo, lo + 1.0)
        while f(hi) >= target:
            hi *= 2.0
        return lo, hi, 1e-12 * hi

    def invert_sales_rate(self, target: float) -> float:
        """Price in ``[p_star, p_bar)`` at which the propensity equals ``target``."""
        if not target > 0:
            raise DomainError(f"sales-rate target must be positive, got {target}")
        vs = self.v_star
        if target > vs * (1 + 1e-12):
            raise InfeasibleError(
                f"propensity {target:.6g} exceeds v(p*)={vs:.6g}; not reachable at admissible prices",
                kind="sales",
            )
        if target >= vs:
            return self.p_star
        f = lambda p: float(self(p))
        lo, hi, tol = self._bisection_bracket(f, target)
        return _bisect_decreasing(f, target, lo, hi, tol)

    def invert_revenue_rate(self, target: float) -> float:
        """Larger root ``p >= p_star`` of ``p * v(p) = target``."""
        if not target > 0:
            raise DomainError(f"revenue-rate target must be positive, got {target}")
        rmax = self.max_revenue_rate
        if target > rmax * (1 + 1e-12):
            raise InfeasibleError(
                f"revenue rate {target:.6g} exceeds the maximum p*v(p*)={rmax:.6g}",
                kind="revenue",
            )
        if target >= rmax:
            return self.p_star
        f = lambda p: float(p * self(p))
        lo, hi, tol = self._bisection_bracket(f, target)
        return _bisect_decreasing(f, target, lo, hi, tol)


class LinearPropensity(Propensity):
    """``v(p) = a - b p`` clamped to ``[0, 1]``, with ``0 < a < 2`` and ``b > 0``."""

    def __init__(self, a: float, b: float):
        a, b = float(a), float(b)
        if not (0 < a < 2):
            raise ScenarioError(f"need 0 < a < 2, got a={a}", "propensity.a")
        if not b > 0:
            raise ScenarioError(f"need b > 0, got b={b}", "propensity.b")
        self.a = a
        self.b = b
        self.p_star = a / (2 * b)
        self.p_bar = a / b

    def __call__(self, p):
        return np.clip(self.a - self.b * np.asarray(p, dtype=float), 0.0, 1.0)

    def derivative(self, p):
        raw = self.a - self.b * np.asarray(p, dtype=float)
        return np.where((raw > 0) & (raw < 1), -self.b, 0.0)

    @property
    def v_star(self) -> float:
        return self.a / 2

    @property
    def max_revenue_rate(self) -> float:
        return self.a * self.a / (4 * self.b)

    def invert_sales_rate(self, target: float) -> float:
        if not target > 0:
            raise DomainError(f"sales-rate target must be positive, got {target}")
        if target > self.v_star * (1 + 1e-12):
            raise InfeasibleError(
                f"propensity {target:.6g} exceeds v(p*)={self.v_star:.6g}; not reachable at admissible prices",
                kind="sales",
            )
        return max((self.a - target) / self.b, self.p_star)

    def invert_revenue_rate(self, target: float) -> float:
        if not target > 0:
            raise DomainError(f"revenue-rate target must be positive, got {target}")
        disc = self.a * self.a - 4 * self.b * target
        if disc < 0:
            if target > self.max_revenue_rate * (1 + 1e-12):
                raise InfeasibleError(
                    f"revenue rate {target:.6g} exceeds the maximum a^2/(4b)={self.max_revenue_rate:.6g}",
                    kind="revenue",
                )
            disc = 0.0
        return (self.a + math.sqrt(disc)) / (2 * self.b)

    def to_dict(self) -> dict:
        return {"form": "linear", "a": self.a, "b": self.b}

    def __eq__(self, other):
        return isinstance(other, LinearPropensity) and (self.a, self.b) == (other.a, other.b)

    __hash__ = None

    def __repr__(self):
        return f"LinearPropensity(a={self.a:g}, b={self.b:g})"


class TabulatedPropensity(Propensity):
    """Propensity interpolated linearly through ``(price, fraction)`` points.

    Below the first price the first fraction is held. If the last fraction is
    positive the curve continues as ``v_N (p_N / p)**2`` so that the revenue
    rate keeps falling and ``p_bar`` is infinite.

    The table is validated on construction: fractions in ``[0, 1]`` and
    non-increasing, ``p v(p)`` strictly increasing up to ``p_star`` and
    strictly decreasing (together with ``v``) from ``p_star`` to ``p_bar``.
    ``v/v' + p`` is also required to be non-decreasing past ``p_star``,
    checked at segment midpoints.
    """

    def __init__(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise ScenarioError("need at least two [price, fraction] points", "propensity.points")
        p, v = pts[:, 0], pts[:, 1]
        if p[0] < 0 or np.any(np.diff(p) <= 0):
            raise ScenarioError("prices must be non-negative and strictly increasing", "propensity.points")
        if np.any(v < 0) or np.any(v > 1):
            raise ScenarioError("fractions must lie in [0, 1]", "propensity.points")
        if np.any(np.diff(v) > 0):
            raise ScenarioError("fractions must be non-increasing in price", "propensity.points")
        self.prices = _frozen(p)
        self.fractions = _frozen(v)
        zero = np.flatnonzero(v == 0)
        self.p_bar = float(p[zero[0]]) if len(zero) else math.inf
        self.p_star = self._argmax_revenue()
        if not self.p_star < self.p_bar:
            raise ScenarioError("revenue-maximizing price must lie below the zero-propensity price", "propensity.points")
        self._validate_shape()

    def _argmax_revenue(self) -> float:
        p, v = self.prices, self.fractions
        cands = list(p)
        for j in range(len(p) - 1):
            s = (v[j + 1] - v[j]) / (p[j + 1] - p[j])
            if s < 0:
                vertex = p[j] / 2 - v[j] / (2 * s)
                if p[j] < vertex < p[j + 1]:
                    cands.append(vertex)
        cands = np.array(cands)
        r = cands * self(cands)
        return float(cands[np.argmax(r)])

    def _validate_shape(self):
        ps = self.p_star
        grid = np.unique(np.concatenate([self.prices, [ps]]))
        up = grid[grid <= ps]
        r_up = up * self(up)
        if np.any(np.diff(r_up) <= 0):
            raise ScenarioError("p*v(p) must be strictly increasing below p*", "propensity.points")
        down = grid[(grid >= ps) & (grid <= self.p_bar)]
        v_down = self(down)
        r_down = down * v_down
        if np.any(np.diff(v_down) >= 0) or np.any(np.diff(r_down) >= 0):
            raise ScenarioError("v and p*v(p) must be strictly decreasing above p*", "propensity.points")
        if len(down) >= 3:
            mids = 0.5 * (down[1:] + down[:-1])
            slopes = np.diff(v_down) / np.diff(down)
            g = self(mids) / slopes + mids
            scale = max(1.0, float(np.max(np.abs(g))))
            if np.any(np.diff(g) < -1e-9 * scale):
                raise ScenarioError("v/v' + p must be non-decreasing above p*", "propensity.points")

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        inside = np.interp(p, self.prices, self.fractions)
        pN, vN = self.prices[-1], self.fractions[-1]
        if vN > 0:
            with np.errstate(divide="ignore"):
                tail = vN * (pN / np.where(p > 0, p, 1.0)) ** 2
            return np.where(p > pN, tail, inside)
        return inside

    def derivative(self, p):
        p = np.asarray(p, dtype=float)
        prices, fr = self.prices, self.fractions
        slopes = np.diff(fr) / np.diff(prices)
        j = np.clip(np.searchsorted(prices, p, side="right") - 1, 0, len(prices) - 2)
        out = slopes[j]
        out = np.where(p < prices[0], 0.0, out)
        pN, vN = prices[-1], fr[-1]
        tail = -2 * vN * pN**2 / np.where(p > 0, p, 1.0) ** 3
        return np.where(p >= pN, tail if vN > 0 else 0.0, out)

    def to_dict(self) -> dict:
        return {"form": "table", "points": [[float(a), float(b)] for a, b in zip(self.prices, self.fractions)]}

    def __eq__(self, other):
        return (
            isinstance(other, TabulatedPropensity)
            and np.array_equal(self.prices, other.prices)
            and np.array_equal(self.fractions, other.fractions)
        )

    __hash__ = None

    def __repr__(self):
        return f"TabulatedPropensity(<{len(self.prices)} points>, p*={self.p_star:g})"


def propensity_from_dict(d: dict) -> Propensity:
    if not isinstance(d, dict):
        raise ScenarioError("must be an object", "propensity")
    form = d.get("form")
    if form == "linear":
        for key in ("a", "b"):
            if key not in d:
                raise ScenarioError("missing field", f"propensity.{key}")
        return LinearPropensity(d["a"], d["b"])
    if form == "table":
        if "points" not in d:
            raise ScenarioError("missing field", "propensity.points")
        return TabulatedPropensity(d["points"])
    raise ScenarioError(f"unknown form {form!r}", "propensity.form")


def propensity_eval(v: Propensity, p: float) -> float:
    """``v(p)``, a fraction in ``[0, 1]``."""
    if p < 0:
        raise DomainError(f"price must be non-negative, got {p}")
    return float(v(p))


def invert_sales_rate(v: Propensity, target: float) -> float:
    return v.invert_sales_rate(target)


def invert_revenue_rate(v: Propensity, target: float) -> float:
    return v.invert_revenue_rate(target)
