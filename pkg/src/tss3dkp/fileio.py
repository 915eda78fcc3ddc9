"""Instance and solution files (JSON syntax, rationals stored as strings)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .model import (
    FirstStageDecision,
    Instance,
    Item,
    MaterialSpec,
    PrinterSpec,
    PrintPlan,
    Scenario,
    Violation,
    check_first_stage,
    check_plan_feasible,
    expected_reward,
    validate_instance,
)

__all__ = [
    "FORMAT_VERSION",
    "FormatError",
    "ValidationError",
    "Solution",
    "SolverStats",
    "instance_to_text",
    "instance_from_text",
    "read_instance",
    "write_instance",
    "solution_to_text",
    "solution_from_text",
    "read_solution",
    "write_solution",
    "rational_str",
    "decimal_str",
]

FORMAT_VERSION = 1

_TOP = ("format_version", "items", "printer", "material", "capacity", "alpha", "scenarios")
_ITEM = ("w", "v", "r", "printable", "m", "t")
_SOLUTION = ("format_version", "objective", "first_stage", "plans", "solver_stats")


class FormatError(ValueError):
    """The file is not well-formed; ``line``/``column`` locate JSON syntax errors."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line, self.column = line, column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


class ValidationError(ValueError):
    """Well-formed content that violates a model invariant."""

    def __init__(self, violations: Sequence[Violation]):
        self.violations = list(violations)
        super().__init__("; ".join(map(str, self.violations)))


def rational_str(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def decimal_str(x, places: int = 9) -> str:
    """Decimal rendering rounded half away from zero, trailing zeros dropped."""
    x = Fraction(x)
    q = abs(x) * 10**places
    n = math.floor(q + Fraction(1, 2))
    whole, frac = divmod(n, 10**places)
    digits = f"{frac:0{places}d}".rstrip("0")
    sign = "-" if x < 0 and n else ""
    return f"{sign}{whole}.{digits}" if digits else f"{sign}{whole}"


def _parse(text: str):
    try:
        return json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, exc.lineno, exc.colno) from None


def _keys(obj, allowed, required, where: str) -> None:
    if not isinstance(obj, dict):
        raise FormatError(f"{where} must be an object")
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise FormatError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise FormatError(f"missing key(s) in {where}: {', '.join(missing)}")


def _int(v, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise FormatError(f"{where} must be an integer, got {v!r}")
    return v


def _rational(v, where: str) -> Fraction:
    if isinstance(v, bool) or not isinstance(v, (str, int, Decimal)):
        raise FormatError(f"{where} must be a rational string such as \"4/5\", got {v!r}")
    try:
        return Fraction(str(v).strip())
    except (ValueError, ZeroDivisionError):
        raise FormatError(f"{where}: cannot read {v!r} as a rational") from None


def _check_version(doc) -> None:
    if doc.get("format_version") != FORMAT_VERSION:
        raise FormatError(f"unsupported format_version {doc.get('format_version')!r}; expected {FORMAT_VERSION}")


# -- instances ------------------------------------------------------------

def instance_to_text(instance: Instance) -> str:
    """Canonical text: identical instances give identical bytes."""
    def item(it: Item) -> dict:
        return {"w": it.weight, "v": it.volume, "r": it.reward, "printable": it.printable,
                "m": it.material, "t": it.print_time}

    p, mat = instance.printer, instance.material
    lines = ["{", f'  "format_version": {FORMAT_VERSION},', '  "items": [']
    lines += [f"    {json.dumps(item(it))}," for it in instance.items]
    if instance.items:
        lines[-1] = lines[-1][:-1]
    lines += [
        "  ],",
        f'  "printer": {json.dumps({"w_p": p.weight, "v_p": p.volume, "T": p.time_budget})},',
        f'  "material": {json.dumps({"w_b": mat.weight, "v_b": mat.volume})},',
        f'  "capacity": {json.dumps({"W": instance.capacity_weight, "V": instance.capacity_volume})},',
        f'  "alpha": "{rational_str(instance.alpha)}",',
        '  "scenarios": [',
    ]
    lines += [f"    {json.dumps({'q': rational_str(sc.probability), 'd': list(sc.demand)})},"
              for sc in instance.scenarios]
    if instance.scenarios:
        lines[-1] = lines[-1][:-1]
    lines += ["  ]", "}"]
    return "\n".join(lines) + "\n"


def instance_from_text(text: str) -> Instance:
    doc = _parse(text)
    _keys(doc, _TOP, _TOP, "instance")
    _check_version(doc)
    if not isinstance(doc["items"], list):
        raise FormatError("items must be an array")
    items = []
    for i, raw in enumerate(doc["items"]):
        where = f"items[{i}]"
        _keys(raw, _ITEM, ("w", "v", "r", "printable"), where)
        printable = raw["printable"]
        if not isinstance(printable, bool):
            raise FormatError(f"{where}.printable must be true or false")
        m = raw.get("m")
        t = raw.get("t")
        items.append(Item(
            _int(raw["w"], f"{where}.w"), _int(raw["v"], f"{where}.v"), _int(raw["r"], f"{where}.r"), printable,
            None if m is None else _int(m, f"{where}.m"), None if t is None else _int(t, f"{where}.t"),
        ))
    _keys(doc["printer"], ("w_p", "v_p", "T"), ("w_p", "v_p", "T"), "printer")
    _keys(doc["material"], ("w_b", "v_b"), ("w_b", "v_b"), "material")
    _keys(doc["capacity"], ("W", "V"), ("W", "V"), "capacity")
    pr, mt, cap = doc["printer"], doc["material"], doc["capacity"]
    if not isinstance(doc["scenarios"], list):
        raise FormatError("scenarios must be an array")
    scenarios = []
    for s, raw in enumerate(doc["scenarios"]):
        where = f"scenarios[{s}]"
        _keys(raw, ("q", "d"), ("q", "d"), where)
        if not isinstance(raw["d"], list):
            raise FormatError(f"{where}.d must be an array")
        demand = tuple(_int(d, f"{where}.d[{i}]") for i, d in enumerate(raw["d"]))
        scenarios.append(Scenario(_rational(raw["q"], f"{where}.q"), demand))
    instance = Instance(
        tuple(items),
        PrinterSpec(_int(pr["w_p"], "printer.w_p"), _int(pr["v_p"], "printer.v_p"), _int(pr["T"], "printer.T")),
        MaterialSpec(_int(mt["w_b"], "material.w_b"), _int(mt["v_b"], "material.v_b")),
        _int(cap["W"], "capacity.W"), _int(cap["V"], "capacity.V"),
        _rational(doc["alpha"], "alpha"), tuple(scenarios),
    )
    bad = validate_instance(instance)
    if bad:
        raise ValidationError(bad)
    return instance


def read_instance(path) -> Instance:
    return instance_from_text(Path(path).read_text(encoding="utf-8"))


def write_instance(instance: Instance, path) -> None:
    bad = validate_instance(instance)
    if bad:
        raise ValidationError(bad)
    Path(path).write_text(instance_to_text(instance), encoding="utf-8")


# -- solutions ------------------------------------------------------------

@dataclass(frozen=True)
class SolverStats:
    nodes: int
    gap: object  # Fraction, or math.inf without an incumbent
    status: str


@dataclass(frozen=True)
class Solution:
    objective: Fraction
    decision: FirstStageDecision
    plans: tuple[PrintPlan, ...]
    stats: Optional[SolverStats] = None


def solution_to_text(solution: Solution) -> str:
    d = solution.decision
    doc = {
        "format_version": FORMAT_VERSION,
        "objective": {"decimal": decimal_str(solution.objective), "exact": rational_str(solution.objective)},
        "first_stage": {"a": list(d.item_counts), "a_p": d.printers, "a_b": d.material},
        "plans": [{"a_s": list(p.matched), "p": [list(row) for row in p.prints]} for p in solution.plans],
    }
    if solution.stats is not None:
        gap = solution.stats.gap
        doc["solver_stats"] = {
            "nodes": solution.stats.nodes,
            "gap": "inf" if isinstance(gap, float) and math.isinf(gap) else rational_str(gap),
            "status": solution.stats.status,
        }
    return json.dumps(doc, indent=1) + "\n"


def solution_from_text(text: str, instance: Instance) -> Solution:
    """Parse a solution and re-check it against ``instance``.

    Fails when the packing or any plan is infeasible, when the plan count
    differs from the scenario count, or when the stated objective is not the
    plans' exact expected reward.
    """
    doc = _parse(text)
    _keys(doc, _SOLUTION, ("format_version", "objective", "first_stage", "plans"), "solution")
    _check_version(doc)
    _keys(doc["objective"], ("decimal", "exact"), ("exact",), "objective")
    objective = _rational(doc["objective"]["exact"], "objective.exact")
    fs = doc["first_stage"]
    _keys(fs, ("a", "a_p", "a_b"), ("a", "a_p", "a_b"), "first_stage")
    if not isinstance(fs["a"], list):
        raise FormatError("first_stage.a must be an array")
    decision = FirstStageDecision(tuple(_int(a, "first_stage.a") for a in fs["a"]),
                                  _int(fs["a_p"], "first_stage.a_p"), _int(fs["a_b"], "first_stage.a_b"))
    if not isinstance(doc["plans"], list):
        raise FormatError("plans must be an array")
    plans = []
    for s, raw in enumerate(doc["plans"]):
        where = f"plans[{s}]"
        _keys(raw, ("a_s", "p"), ("a_s", "p"), where)
        if not isinstance(raw["a_s"], list) or not isinstance(raw["p"], list) or \
                not all(isinstance(row, list) for row in raw["p"]):
            raise FormatError(f"{where}: a_s must be an array and p an array of arrays")
        plans.append(PrintPlan(s, tuple(_int(a, f"{where}.a_s") for a in raw["a_s"]),
                               tuple(tuple(_int(p, f"{where}.p") for p in row) for row in raw["p"])))
    stats = None
    if "solver_stats" in doc:
        st = doc["solver_stats"]
        _keys(st, ("nodes", "gap", "status"), ("nodes", "gap", "status"), "solver_stats")
        gap = math.inf if st["gap"] == "inf" else _rational(st["gap"], "solver_stats.gap")
        stats = SolverStats(_int(st["nodes"], "solver_stats.nodes"), gap, str(st["status"]))

    bad = check_first_stage(instance, decision)
    if len(plans) != instance.n_scenarios:
        bad.append(Violation("plan_count", f"{len(plans)} plans for {instance.n_scenarios} scenarios"))
    if not bad:
        for plan in plans:
            bad += check_plan_feasible(instance, decision, plan)
    if not bad:
        actual = expected_reward(instance, decision, plans)
        if actual != objective:
            bad.append(Violation("objective_mismatch", f"file states {objective}, plans yield {actual}"))
    if bad:
        raise ValidationError(bad)
    return Solution(objective, decision, tuple(plans), stats)


def read_solution(path, instance: Instance) -> Solution:
    return solution_from_text(Path(path).read_text(encoding="utf-8"), instance)


def write_solution(solution: Solution, path) -> None:
    Path(path).write_text(solution_to_text(solution), encoding="utf-8")
