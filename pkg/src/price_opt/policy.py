"""Pricing policies and solver traces."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ScenarioError
from .functions import LinearPropensity, ValueWeight, integrate_I, integrate_J, integrate_K
from .scenario import Scenario

POLICY_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ConstantPrice:
    p: float


@dataclass(frozen=True)
class TvmSegment:
    """Price ``(a/b - q/zeta(t)) / 2`` for a multiplier ``q <= 0``."""

    q: float


@dataclass(frozen=True)
class Segment:
    t_start: float
    t_end: float
    form: ConstantPrice | TvmSegment

    @property
    def kind(self) -> str:
        return "const" if isinstance(self.form, ConstantPrice) else "tvm"

    @property
    def value(self) -> float:
        return self.form.p if isinstance(self.form, ConstantPrice) else self.form.q


def tvm_price(propensity: LinearPropensity, q: float, zeta_t):
    return 0.5 * (propensity.a / propensity.b - q / np.asarray(zeta_t))


@dataclass(frozen=True)
class PricingPolicy:
    """Contiguous segments covering ``[0, T)``.

    Multiplier segments are evaluated against ``weight`` when it is set,
    otherwise against the scenario's ``zeta``. Baselines that plan under a
    misspecified weight keep it here.
    """

    segments: tuple
    weight: ValueWeight | None = None
    label: str = ""

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise ScenarioError("policy has no segments", "segments")
        if segs[0].t_start != 0:
            raise ScenarioError("policy must start at t=0", "segments")
        for s0, s1 in zip(segs, segs[1:]):
            if s0.t_end != s1.t_start:
                raise ScenarioError(f"gap or overlap between {s0.t_end} and {s1.t_start}", "segments")
        for s in segs:
            if not s.t_end > s.t_start:
                raise ScenarioError(f"empty segment at {s.t_start}", "segments")

    @property
    def horizon(self) -> float:
        return self.segments[-1].t_end

    @property
    def breakpoints(self) -> np.ndarray:
        return np.array([s.t_start for s in self.segments] + [self.horizon])

    def covers(self, scenario: Scenario) -> bool:
        return self.horizon == scenario.horizon

    def segment_index(self, t, side="right"):
        starts = np.array([s.t_start for s in self.segments])
        idx = np.searchsorted(starts, np.asarray(t, dtype=float), side=side) - 1
        return np.clip(idx, 0, len(self.segments) - 1)

    def segment_prices(self, seg: Segment, s: Scenario, t, side="right"):
        """Internal prices of one segment at times ``t``."""
        t = np.asarray(t, dtype=float)
        if isinstance(seg.form, ConstantPrice):
            return np.full(t.shape, seg.form.p)
        zeta = self.weight if self.weight is not None else s.zeta
        return tvm_price(s.propensity, seg.form.q, zeta(t, side))

    def internal_price(self, s: Scenario, t, side="right"):
        """Price entering the propensity (posted price divided by ``kappa``)."""
        t = np.asarray(t, dtype=float)
        idx = self.segment_index(t, side)
        out = np.empty(t.shape)
        for j, seg in enumerate(self.segments):
            mask = idx == j
            if np.any(mask):
                out[mask] = self.segment_prices(seg, s, t[mask], side)
        return out

    def posted_price(self, s: Scenario, t, side="right"):
        return s.kappa(t, side) * self.internal_price(s, t, side)

    def prices(self) -> list[float]:
        return [seg.value for seg in self.segments]


def segment_totals(policy: PricingPolicy, seg: Segment, s: Scenario) -> tuple[float, float]:
    """Sales and objective revenue of one segment, in closed form."""
    a0, a1 = seg.t_start, seg.t_end
    v = s.propensity
    if isinstance(seg.form, ConstantPrice):
        p = seg.form.p
        vp = float(v(p))
        return vp * integrate_K(s.demand, a0, a1), p * vp * integrate_J(s.demand, s.zeta, a0, a1)
    if policy.weight is not None:
        # planned under a different weight: objective needs the true zeta
        return _tvm_totals_mismatched(policy, seg, s)
    q = seg.form.q
    K = integrate_K(s.demand, a0, a1)
    I = integrate_I(s.demand, s.zeta, a0, a1)
    J = integrate_J(s.demand, s.zeta, a0, a1)
    return 0.5 * (v.a * K + q * v.b * I), v.a**2 / (4 * v.b) * J - q * q * v.b / 4 * I


def _tvm_totals_mismatched(policy, seg, s):
    from .functions import simpson

    edges = np.unique(
        np.concatenate(
            [[seg.t_start, seg.t_end], s.demand.breakpoints, s.zeta.breakpoints, policy.weight.breakpoints]
        )
    )
    edges = edges[(edges >= seg.t_start) & (edges <= seg.t_end)]

    def sales(t, side):
        return s.propensity(policy.segment_prices(seg, s, t, side)) * s.demand(t, side)

    def revenue(t, side):
        p = policy.segment_prices(seg, s, t, side)
        return s.zeta(t, side) * p * s.propensity(p) * s.demand(t, side)

    return simpson(sales, edges), simpson(revenue, edges)


def cumulative_at_grid(s: Scenario, policy: PricingPolicy) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative sales and objective revenue at every constraint time."""
    taus = s.taus
    edges = np.unique(np.concatenate([taus, policy.breakpoints]))
    sales = [0.0]
    rev = [0.0]
    for t0, t1 in zip(edges[:-1], edges[1:]):
        seg = policy.segments[int(policy.segment_index(t0))]
        sub = Segment(t0, t1, seg.form)
        ds, dr = segment_totals(policy, sub, s)
        sales.append(sales[-1] + ds)
        rev.append(rev[-1] + dr)
    pos = np.searchsorted(edges, taus)
    return np.asarray(sales)[pos], np.asarray(rev)[pos]


# ---------------------------------------------------------------------------
# solver trace


@dataclass(frozen=True)
class Candidate:
    k: int
    kind: str  # "sales" or "revenue"
    value: float  # price (basic solver) or multiplier (TVM solver)


@dataclass(frozen=True)
class TraceStep:
    t_start: float
    t_end: float
    start_index: int
    binding_index: int
    binding_kind: str
    candidates: tuple
    residuals: tuple  # (k, sales residual, revenue residual)
    argmax_sales: int | None = None
    argmax_revenue: int | None = None


@dataclass
class SolveTrace:
    steps: list = field(default_factory=list)
    solver: str = ""

    def format(self) -> str:
        lines = [f"solver: {self.solver}"]
        for st in self.steps:
            lines.append(
                f"[{st.t_start:g}, {st.t_end:g}) from grid index {st.start_index}: "
                f"binding constraint {st.binding_index} ({st.binding_kind})"
            )
            for k, rs, rr in st.residuals:
                lines.append(f"    residual k={k}: sales {rs:.10g}, revenue {rr:.10g}")
            for c in st.candidates:
                lines.append(f"    candidate k={c.k} {c.kind}: {c.value:.12g}")
            if st.argmax_sales is not None or st.argmax_revenue is not None:
                lines.append(f"    rate argmax: sales j_S={st.argmax_sales}, revenue j_R={st.argmax_revenue}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# CSV


def policy_to_csv(policy: PricingPolicy) -> str:
    if policy.weight is not None and any(s.kind == "tvm" for s in policy.segments):
        raise ScenarioError("policies planned under a custom weight cannot be written as CSV", "weight")
    buf = io.StringIO()
    buf.write(f"# schema_version: {POLICY_SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t_start", "t_end", "form", "value"])
    for s in policy.segments:
        w.writerow([repr(float(s.t_start)), repr(float(s.t_end)), s.kind, repr(float(s.value))])
    return buf.getvalue()


def policy_from_csv(text: str, label: str = "") -> PricingPolicy:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# schema_version:"):
        raise ScenarioError("missing '# schema_version: N' header", "schema_version")
    version = lines[0].split(":", 1)[1].strip()
    if version != str(POLICY_SCHEMA_VERSION):
        raise ScenarioError(f"unsupported schema_version {version!r}", "schema_version")
    reader = csv.DictReader(lines[1:])
    segs = []
    for row in reader:
        try:
            t0, t1, val = float(row["t_start"]), float(row["t_end"]), float(row["value"])
        except (KeyError, TypeError, ValueError):
            raise ScenarioError(f"malformed row {row}", "segments") from None
        if row["form"] == "const":
            form = ConstantPrice(val)
        elif row["form"] == "tvm":
            form = TvmSegment(val)
        else:
            raise ScenarioError(f"unknown segment form {row['form']!r}", "form")
        segs.append(Segment(t0, t1, form))
    return PricingPolicy(tuple(segs), label=label)


def write_policy(policy: PricingPolicy, path) -> None:
    Path(path).write_text(policy_to_csv(policy))


def read_policy(path, label: str = "") -> PricingPolicy:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read policy file {path}: {exc.strerror}") from exc
    return policy_from_csv(text, label=label or path.stem)


def constant_policy(p: float, horizon: float, label: str = "") -> PricingPolicy:
    return PricingPolicy((Segment(0.0, float(horizon), ConstantPrice(float(p))),), label=label)


def segments_from_pairs(pairs: Sequence[tuple[float, float, float]]) -> PricingPolicy:
    return PricingPolicy(tuple(Segment(a, b, ConstantPrice(p)) for a, b, p in pairs))
