"""Command-line front end: ``price-opt <command> --scenario <path> ...``.

Exit status: 0 on success, 1 on I/O or validation errors (and failed
certification), 2 when the scenario is infeasible.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DomainError, InfeasibleError, OracleLimitError, ScenarioError
from .oracle import GridSearchSpec, best_piecewise_constant, best_piecewise_q
from .policy import cumulative_at_grid, policy_to_csv, read_policy
from .scenario import Scenario, load_scenario
from .simulator import baseline_nearest_constraint, baseline_value_blind, compare, simulate
from .solver_basic import solve_basic
from .solver_tvm import solve_tvm_linear

log = logging.getLogger("price_opt")

COMMANDS = ("solve-basic", "solve-tvm", "simulate", "compare", "certify")
BASELINES = ("nearest", "phi-blind", "kappa-blind", "both-blind")
EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    scenario: Path
    out: Path | None = None
    dt: float | None = None
    baselines: tuple = ()
    grid: GridSearchSpec | None = None
    policy: Path | None = None


def _setup_logging():
    level = os.environ.get("PRICE_OPT_LOG", "off").lower()
    levels = {"off": logging.CRITICAL + 1, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.CRITICAL + 1), format="%(levelname)s %(name)s: %(message)s")


def optimal_policy(s: Scenario):
    if s.is_basic:
        return solve_basic(s)
    return solve_tvm_linear(s)


def baseline_policy(s: Scenario, name: str):
    if name == "nearest":
        return baseline_nearest_constraint(s)
    return baseline_value_blind(s, name.split("-")[0])


def _emit(text: str, out: Path | None, cfg: RunConfig, suffix_files=None):
    if out is None:
        sys.stdout.write(text)
        return
    out.write_text(text)
    for suffix, content in (suffix_files or {}).items():
        out.with_name(out.name + suffix).write_text(content)
    meta = {
        "command": cfg.command,
        "scenario": str(cfg.scenario),
        "version": __version__,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    out.with_name(out.name + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")


def _solve(cfg: RunConfig, s: Scenario) -> int:
    policy, trace = solve_basic(s) if cfg.command == "solve-basic" else solve_tvm_linear(s)
    csv_text = policy_to_csv(policy)
    if cfg.out is None:
        sys.stdout.write(csv_text)
        sys.stderr.write(trace.format())
    else:
        _emit(csv_text, cfg.out, cfg, {".trace.txt": trace.format()})
    return EXIT_OK


def _simulate(cfg: RunConfig, s: Scenario) -> int:
    if cfg.policy is not None:
        policy = read_policy(cfg.policy)
    elif cfg.baselines:
        policy = baseline_policy(s, cfg.baselines[0])
    else:
        policy, _ = optimal_policy(s)
    result = simulate(s, policy, cfg.dt)
    _emit(result.to_csv(), cfg.out, cfg)
    return EXIT_OK


def _compare(cfg: RunConfig, s: Scenario) -> int:
    names = cfg.baselines or (("nearest",) if s.is_basic else ("both-blind",))
    policies = [optimal_policy(s)[0]] + [baseline_policy(s, n) for n in names]
    report = compare(simulate(s, p, cfg.dt) for p in policies)
    _emit(report.to_csv(), cfg.out, cfg)
    sys.stderr.write(report.format())
    return EXIT_OK


def _certify(cfg: RunConfig, s: Scenario) -> int:
    policy, _ = optimal_policy(s)
    _, rev = cumulative_at_grid(s, policy)
    solver_rev = float(rev[-1])
    if s.is_basic and s.schedule.n_intervals <= 3:
        spec = cfg.grid or GridSearchSpec(s.propensity.p_star, min(s.propensity.p_bar, 2 * s.propensity.p_star), 1e-3)
        res = best_piecewise_constant(s, spec)
        bound = spec.step
        kind = "price"
    elif s.schedule.n_intervals <= 2:
        v = s.propensity
        t = np.linspace(0.0, s.horizon, 1025)
        zmax = max(float(s.zeta(t, side).max()) for side in ("left", "right"))
        # the oracle drops values pricing above a/b, so start at the widest admissible q
        spec = cfg.grid or GridSearchSpec(-v.a * zmax / v.b, 0.0, 1e-3)
        res = best_piecewise_q(s, spec)
        bound = 1e-4
        kind = "multiplier"
    else:
        raise DomainError("certify handles at most 3 intervals (basic) or 2 intervals (weighted)")
    lines = [
        f"oracle: {kind} grid [{spec.lo:g}, {spec.hi:g}] step {spec.step:g}, {res.evaluations} assignments",
        f"solver revenue: {solver_rev!r}",
        f"oracle revenue: {res.revenue!r}" + ("" if res.feasible else " (no feasible grid point)"),
    ]
    passed = res.revenue <= solver_rev + bound
    lines.append(f"{'PASS' if passed else 'FAIL'}: oracle excess {res.revenue - solver_rev:.3g} (allowed {bound:g})")
    _emit("\n".join(lines) + "\n", cfg.out, cfg)
    return EXIT_OK if passed else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="price-opt", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--scenario", required=True, type=Path, help="scenario JSON file")
    ap.add_argument("--out", type=Path, help="output file (default: stdout)")
    ap.add_argument("--dt", type=float, help="simulation step in days (default T/100000)")
    ap.add_argument("--baseline", action="append", choices=BASELINES, default=[], help="baseline policy; repeatable")
    ap.add_argument("--grid", help="oracle grid 'min,max,step'")
    ap.add_argument("--policy", type=Path, help="policy CSV to simulate")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return ap


def run(cfg: RunConfig) -> int:
    try:
        s = load_scenario(cfg.scenario)
        handler = {"solve-basic": _solve, "solve-tvm": _solve, "simulate": _simulate,
                   "compare": _compare, "certify": _certify}[cfg.command]
        return handler(cfg, s)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        for v in exc.violations:
            print(f"  violated: {v}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (OSError, ScenarioError, DomainError, OracleLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        grid = GridSearchSpec.parse(args.grid) if args.grid else None
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.dt is not None and not args.dt > 0:
        print("error: --dt must be positive", file=sys.stderr)
        return EXIT_ERROR
    cfg = RunConfig(args.command, args.scenario, args.out, args.dt, tuple(args.baseline), grid, args.policy)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
