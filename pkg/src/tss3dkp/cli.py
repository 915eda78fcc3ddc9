"""Command-line front end.

Exit codes: 0 success, 1 invalid input (or a failed check), 2 a solver limit
was reached. Results go to stdout; diagnostics go to stderr as one JSON object
per line.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import random
import sys
from fractions import Fraction
from pathlib import Path

from .bounds import printer_upper_bound
from .deteq import SolveError, build_det_equiv, evaluate_first_stage, extract_solution
from .experiments import SweepSpec, report_csv, run_sweep, write_report
from .fileio import (
    FormatError,
    Solution,
    SolverStats,
    ValidationError,
    decimal_str,
    instance_to_text,
    rational_str,
    read_instance,
    write_instance,
    write_solution,
)
from .generator import ASPECTS, GenConfig, generate
from .mip import MipParams, MipStatus, solve_mip
from .model import FirstStageDecision, Violation, check_first_stage
from .mps import export_mps
from .oracle import OracleLimits, brute_force_full, random_tiny_instance

__all__ = ["main", "build_parser", "TIME_LIMIT_ENV"]

TIME_LIMIT_ENV = "TSS3DKP_TIME_LIMIT"

EXIT_OK, EXIT_INVALID, EXIT_LIMIT = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # keep exit code 2 for solver limits
        raise _UsageError(message)


class _JsonFormatter(logging.Formatter):
    def format(self, record):
        return json.dumps({"level": record.levelname.lower(), "source": record.name, "message": record.getMessage()})


def _diag(kind: str, message: str, **extra) -> None:
    print(json.dumps({"level": "error", "kind": kind, "message": message, **extra}), file=sys.stderr)


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _grid_value(text: str):
    t = text.strip().lower()
    if t in ("inf", "infinity", "∞"):
        return math.inf
    return _rational(t)


def _default_time_limit() -> float:
    raw = os.environ.get(TIME_LIMIT_ENV)
    if not raw:
        return math.inf
    try:
        value = float(raw)
    except ValueError:
        raise _UsageError(f"{TIME_LIMIT_ENV}={raw!r} is not a number of seconds") from None
    if value <= 0:
        raise _UsageError(f"{TIME_LIMIT_ENV} must be positive")
    return value


def _params(args) -> MipParams:
    time_limit = args.time_limit if args.time_limit is not None else _default_time_limit()
    node_limit = args.node_limit if args.node_limit is not None else math.inf
    return MipParams(args.gap, node_limit, time_limit)


def _add_solver_flags(p) -> None:
    p.add_argument("--gap", type=_rational, default=Fraction(1, 1000), help="relative gap (default 1/1000)")
    p.add_argument("--time-limit", type=float, default=None,
                   help=f"seconds per solve (default: ${TIME_LIMIT_ENV}, else none)")
    p.add_argument("--node-limit", type=int, default=None, help="nodes per solve (default: none)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tss3dkp", description="Two-stage stochastic 3D-printing knapsack toolkit")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("--items", type=int, required=True)
    p.add_argument("--demand-limit", type=int, required=True)
    p.add_argument("--scenarios", type=int, required=True)
    p.add_argument("--alpha", type=_rational, default=Fraction(4, 5))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", type=Path, default=None, help="instance file (default: stdout)")

    p = sub.add_parser("solve", help="solve the deterministic equivalent")
    p.add_argument("--instance", type=Path, required=True)
    _add_solver_flags(p)
    p.add_argument("--no-printers", action="store_true", help="forbid packing printers")
    p.add_argument("--out-solution", type=Path, default=None)
    p.add_argument("--export-mps", type=Path, default=None)
    p.add_argument("--mps-negate", action="store_true", help="export as a minimisation of the negated objective")

    p = sub.add_parser("eval", help="expected reward of a fixed packing")
    p.add_argument("--instance", type=Path, required=True)
    p.add_argument("--first-stage", required=True, help="a_1,...,a_n,a_p,a_b")

    p = sub.add_parser("sweep", help="reward-gain sweep over one aspect")
    p.add_argument("--aspect", choices=ASPECTS, required=True)
    p.add_argument("--grid", required=True, help="comma-separated values, e.g. 0.1,0.5,1 or 2,5,inf")
    p.add_argument("--per-value", type=int, default=30)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--items", type=int, default=15)
    p.add_argument("--demand-limit", type=int, default=20)
    p.add_argument("--scenarios", type=int, default=10)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-csv", type=Path, default=None, help="CSV path (default: stdout, no metadata file)")
    _add_solver_flags(p)

    p = sub.add_parser("oracle-check", help="compare the solver with brute force on tiny instances")
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--max-items", type=int, default=4)
    p.add_argument("--max-scenarios", type=int, default=3)
    p.add_argument("--max-demand", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("bound", help="printer bound U and the packing cap Z")
    p.add_argument("--instance", type=Path, required=True)
    return parser


def _fmt_cap(c) -> str:
    return "inf" if isinstance(c, float) and math.isinf(c) else str(c)


def _cmd_gen(args) -> int:
    config = GenConfig(args.items, args.demand_limit, args.scenarios, alpha=args.alpha)
    instance, trace = generate(config, args.seed)
    meta = {"seed": args.seed, "config": {"n_items": config.n_items, "demand_limit": config.demand_limit,
                                          "n_scenarios": config.n_scenarios, "alpha": rational_str(config.alpha)},
            "trace": trace.to_dict()}
    if args.out is None:
        sys.stdout.write(instance_to_text(instance))
    else:
        write_instance(instance, args.out)
        args.out.with_name(args.out.name + ".meta.json").write_text(
            json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_solve(args) -> int:
    instance = read_instance(args.instance)
    allow = not args.no_printers
    bound = printer_upper_bound(instance)
    Z = bound.Z if allow else 0
    problem, vmap = build_det_equiv(instance, Z, allow_printers=allow)
    if args.export_mps is not None:
        export_mps(problem, vmap, args.export_mps, negate=args.mps_negate)
    res = solve_mip(problem, _params(args))
    if res.status == MipStatus.INFEASIBLE:
        _diag("solver", "model reported infeasible")
        return EXIT_INVALID
    print(f"status {res.status.value}")
    if res.has_incumbent:
        decision, plans = extract_solution(res, vmap)
        print(f"objective {rational_str(res.objective)} ({decimal_str(res.objective)})")
        print(f"first_stage a={','.join(map(str, decision.item_counts))} a_p={decision.printers} "
              f"a_b={decision.material}")
        print(f"nodes {res.nodes} gap {decimal_str(res.gap)}")
        if args.out_solution is not None:
            write_solution(Solution(res.objective, decision, tuple(plans),
                                    SolverStats(res.nodes, res.gap, res.status.value)), args.out_solution)
    if res.status != MipStatus.OPTIMAL_WITHIN_GAP:
        _diag("limit", f"solver stopped early: {res.status.value}", nodes=res.nodes)
        return EXIT_LIMIT
    return EXIT_OK


def _cmd_eval(args) -> int:
    instance = read_instance(args.instance)
    try:
        values = [int(x) for x in args.first_stage.split(",")]
    except ValueError:
        raise _UsageError("--first-stage expects comma-separated integers a_1,...,a_n,a_p,a_b") from None
    if len(values) != instance.n_items + 2:
        raise ValidationError([Violation("dimension", f"--first-stage needs {instance.n_items + 2} values, "
                                                      f"got {len(values)}")])
    decision = FirstStageDecision(tuple(values[:-2]), values[-2], values[-1])
    bad = check_first_stage(instance, decision)
    if bad:
        raise ValidationError(bad)
    value = evaluate_first_stage(instance, decision)
    print(f"expected_reward {rational_str(value)} ({decimal_str(value)})")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    grid = tuple(_grid_value(v) for v in args.grid.split(",") if v.strip())
    base = GenConfig(args.items, args.demand_limit, args.scenarios)
    spec = SweepSpec(base, args.aspect, grid, args.per_value, args.seed, _params(args))

    def progress(value, outcome):
        logging.getLogger("tss3dkp.sweep").info("value %s seed %s: %s", value, outcome.seed,
                                                 "fail" if outcome.failed else f"printers {outcome.printers}")

    report = run_sweep(spec, workers=args.workers, progress=progress)
    if args.out_csv is None:
        sys.stdout.write(report_csv(report))
    else:
        write_report(report, args.out_csv)
        print(f"wrote {args.out_csv}")
    return EXIT_OK


def _cmd_oracle_check(args) -> int:
    rng = random.Random(args.seed)
    matches = 0
    for k in range(args.count):
        inst = random_tiny_instance(rng, args.max_items, args.max_scenarios, args.max_demand)
        expected, _ = brute_force_full(inst, OracleLimits())
        problem, _ = build_det_equiv(inst, printer_upper_bound(inst).Z)
        res = solve_mip(problem, MipParams(Fraction(0)))
        if res.objective == expected:
            matches += 1
        else:
            _diag("mismatch", f"instance {k}: solver {res.objective}, brute force {expected}")
    print(f"{matches}/{args.count} match")
    return EXIT_OK if matches == args.count else EXIT_INVALID


def _cmd_bound(args) -> int:
    instance = read_instance(args.instance)
    b = printer_upper_bound(instance)
    print(f"U={b.U} Z={b.Z}")
    print(f"per_scenario={','.join(map(str, b.per_scenario_count))} "
          f"cap_weight={_fmt_cap(b.cap_weight)} cap_volume={_fmt_cap(b.cap_volume)}")
    return EXIT_OK


_COMMANDS = {
    "gen": _cmd_gen,
    "solve": _cmd_solve,
    "eval": _cmd_eval,
    "sweep": _cmd_sweep,
    "oracle-check": _cmd_oracle_check,
    "bound": _cmd_bound,
}


def main(argv=None) -> int:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(_JsonFormatter())
    root = logging.getLogger("tss3dkp")
    root.handlers[:] = [handler]
    root.propagate = False
    try:
        args = build_parser().parse_args(argv)
        root.setLevel(logging.INFO if args.verbose else logging.WARNING)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        _diag("usage", str(exc))
    except FormatError as exc:
        _diag("format", str(exc), line=exc.line, column=exc.column)
    except ValidationError as exc:
        _diag("validation", str(exc), violations=[{"code": v.code, "message": v.message} for v in exc.violations])
    except (OSError, SolveError, ValueError) as exc:
        _diag(type(exc).__name__, str(exc))
    return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
