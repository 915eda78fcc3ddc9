"""Reward-gain experiments: solve each instance with and without printers.

A sweep varies one aspect over a grid of values, reusing the same generated
base instances (seed ``base_seed + index``) at every grid value, and reports
median, min, max and mean of the printers packed and of the percentage gain.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence

from .bounds import printer_upper_bound
from .deteq import SolveError, build_det_equiv, extract_solution
from .generator import GenConfig, SweepOverride, apply_sweep_override, generate, round_half_away
from .mip import MipParams, MipStatus, solve_mip
from .model import Instance

log = logging.getLogger(__name__)

__all__ = [
    "RunStats",
    "InstanceOutcome",
    "SweepSpec",
    "SweepRow",
    "SweepReport",
    "reward_gain",
    "run_sweep",
    "summarize",
    "format_decimal",
    "format_value",
    "CSV_COLUMNS",
    "write_report",
    "report_csv",
    "report_metadata",
]

CSV_COLUMNS = (
    "value", "n", "fails", "undef_gains",
    "printers_median", "printers_min", "printers_max", "printers_mean",
    "gain_median", "gain_min", "gain_max", "gain_mean",
)


@dataclass(frozen=True)
class RunStats:
    status: str
    nodes: int
    gap: float
    seconds: float = field(compare=False)


@dataclass(frozen=True)
class InstanceOutcome:
    """Result of one with/without comparison.

    ``gain`` is a percentage. It is ``None`` when the instance failed or when
    the reward without printers is zero while the reward with printers is not
    (``gain_undefined``).
    """

    seed: Optional[int]
    printers: Optional[int]
    reward_with: Optional[Fraction]
    reward_without: Optional[Fraction]
    gain: Optional[Fraction]
    gain_undefined: bool = False
    failed: bool = False
    reason: str = ""
    with_stats: Optional[RunStats] = None
    without_stats: Optional[RunStats] = None


def _solve(instance: Instance, Z: int, allow: bool, params: MipParams):
    problem, vmap = build_det_equiv(instance, Z, allow_printers=allow)
    t0 = time.perf_counter()
    res = solve_mip(problem, params)
    stats = RunStats(res.status.value, res.nodes, float(res.gap), time.perf_counter() - t0)
    return res, vmap, stats


def reward_gain(instance: Instance, params: MipParams = MipParams(), seed: Optional[int] = None) -> InstanceOutcome:
    """Compare the optimum with printers against the optimum without them.

    The run without printers uses ``Z = 0``. A run that stops on a limit, or
    that the solver cannot finish, makes the instance a fail.
    """
    Z = printer_upper_bound(instance).Z
    try:
        res_w, vmap_w, st_w = _solve(instance, Z, True, params)
        res_o, _, st_o = _solve(instance, 0, False, params)
    except (RuntimeError, ValueError) as exc:
        log.warning("seed %s: solver error: %s", seed, exc)
        return InstanceOutcome(seed, None, None, None, None, failed=True, reason=str(exc))
    if res_w.status != MipStatus.OPTIMAL_WITHIN_GAP or res_o.status != MipStatus.OPTIMAL_WITHIN_GAP:
        reason = f"with printers: {res_w.status.value}, without: {res_o.status.value}"
        return InstanceOutcome(seed, None, None, None, None, failed=True, reason=reason,
                               with_stats=st_w, without_stats=st_o)
    try:
        decision, _ = extract_solution(res_w, vmap_w)
    except SolveError as exc:
        return InstanceOutcome(seed, None, None, None, None, failed=True, reason=str(exc),
                               with_stats=st_w, without_stats=st_o)

    with_, without = res_w.objective, res_o.objective
    undefined = False
    if without > 0:
        gain = 100 * (with_ - without) / without
    elif with_ == without:
        gain = Fraction(0)
    else:
        gain, undefined = None, True
    return InstanceOutcome(seed, decision.printers, with_, without, gain, undefined,
                           with_stats=st_w, without_stats=st_o)


def summarize(values: Sequence) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    """``(median, min, max, mean)`` as exact rationals."""
    if not values:
        raise ValueError("cannot summarize an empty list")
    v = sorted(Fraction(x) for x in values)
    k = len(v)
    median = v[k // 2] if k % 2 else (v[k // 2 - 1] + v[k // 2]) / 2
    return median, v[0], v[-1], sum(v, Fraction(0)) / k


@dataclass(frozen=True)
class SweepSpec:
    base: GenConfig
    aspect: str
    grid: tuple
    instances: int = 30
    base_seed: int = 0
    params: MipParams = MipParams()

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(SweepOverride(self.aspect, v).value for v in self.grid))
        if self.instances < 0:
            raise ValueError("instances per value must be >= 0")


@dataclass(frozen=True)
class SweepRow:
    value: object
    n: int
    fails: int
    undef_gains: int
    printers: Optional[tuple[Fraction, Fraction, Fraction, Fraction]]
    gain: Optional[tuple[Fraction, Fraction, Fraction, Fraction]]


@dataclass
class SweepReport:
    spec: SweepSpec
    rows: list[SweepRow]
    outcomes: dict = field(repr=False)  # grid value -> outcomes sorted by seed


def _sweep_task(args) -> InstanceOutcome:
    spec, value, seed = args
    instance, trace = generate(spec.base, seed)
    instance = apply_sweep_override(spec.base, instance, SweepOverride(spec.aspect, value), trace)
    return reward_gain(instance, spec.params, seed)


def _row(value, outcomes: list[InstanceOutcome]) -> SweepRow:
    ok = [o for o in outcomes if not o.failed]
    gains = [o.gain for o in ok if not o.gain_undefined]
    return SweepRow(
        value, len(outcomes), len(outcomes) - len(ok), sum(o.gain_undefined for o in ok),
        summarize([o.printers for o in ok]) if ok else None,
        summarize(gains) if gains else None,
    )


def run_sweep(spec: SweepSpec, workers: int = 1,
              progress: Optional[Callable[[object, InstanceOutcome], None]] = None) -> SweepReport:
    """Solve every (grid value, seed) pair and aggregate per grid value.

    With ``workers > 1`` instances run in separate processes; results are
    collected in (value, seed) order, so the report does not depend on it.
    """
    tasks = [(spec, v, spec.base_seed + k) for v in spec.grid for k in range(spec.instances)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_task, tasks))
    else:
        results = []
        for t in tasks:
            results.append(_sweep_task(t))
            if progress:
                progress(t[1], results[-1])
    outcomes: dict = {v: [] for v in spec.grid}
    for (_, v, _), out in zip(tasks, results):
        outcomes[v].append(out)
    for v in outcomes:
        outcomes[v].sort(key=lambda o: o.seed)
    return SweepReport(spec, [_row(v, outcomes[v]) for v in spec.grid], outcomes)


def format_decimal(x, places: int = 1) -> str:
    """Fixed-point rendering, ties rounded away from zero."""
    scale = 10 ** places
    q = round_half_away(Fraction(x) * scale)
    sign = "-" if q < 0 else ""
    whole, frac = divmod(abs(q), scale)
    return f"{sign}{whole}.{frac:0{places}d}" if places else f"{sign}{whole}"


def format_value(v) -> str:
    """Grid values as short exact decimals: 2, 0.5, inf."""
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    v = Fraction(v)
    if v.denominator == 1:
        return str(v.numerator)
    for places in range(1, 7):
        if (v * 10**places).denominator == 1:
            return format_decimal(v, places)
    return format_decimal(v, 6)


def report_csv(report: SweepReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in report.rows:
        stats = []
        for block in (row.printers, row.gain):
            stats += [format_decimal(x) for x in block] if block else [""] * 4
        w.writerow([format_value(row.value), row.n, row.fails, row.undef_gains, *stats])
    return buf.getvalue()


def report_metadata(report: SweepReport) -> dict:
    spec = report.spec
    base = asdict(spec.base)
    base["alpha"] = str(spec.base.alpha)
    base["printable_fraction"] = str(spec.base.printable_fraction)
    p = spec.params
    return {
        "seed": spec.base_seed,
        "aspect": spec.aspect,
        "grid": [format_value(v) for v in spec.grid],
        "instances": spec.instances,
        "config": base,
        "solver": {
            "relative_gap": str(p.relative_gap),
            "node_limit": None if math.isinf(p.node_limit) else int(p.node_limit),
            "time_limit": None if math.isinf(p.time_limit) else p.time_limit,
        },
    }


def write_report(report: SweepReport, path) -> tuple[Path, Path]:
    """Write the CSV table and a ``<name>.meta.json`` sidecar holding the seed and settings."""
    path = Path(path)
    path.write_text(report_csv(report), encoding="utf-8")
    meta = path.with_name(path.name + ".meta.json")
    meta.write_text(json.dumps(report_metadata(report), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path, meta
