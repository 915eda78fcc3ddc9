"""Domain types for the stochastic 3D-printing knapsack and exact reward accounting.

All instance data are integers. Scenario probabilities and the print quality
factor are :class:`fractions.Fraction`, so every reward computed here is an
exact rational.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

__all__ = [
    "Item",
    "PrinterSpec",
    "MaterialSpec",
    "Scenario",
    "Instance",
    "FirstStageDecision",
    "PrintPlan",
    "Violation",
    "InfeasiblePlanError",
    "validate_instance",
    "check_first_stage",
    "check_plan_feasible",
    "matched_quantities",
    "scenario_reward",
    "expected_reward",
    "demand_reward_bound",
    "empty_plan",
    "can_print",
    "as_rational",
]


class InfeasiblePlanError(ValueError):
    """Raised when a reward is requested for a plan that breaks a constraint."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


@dataclass(frozen=True)
class Item:
    """A packable item type.

    ``material`` and ``print_time`` are set exactly when ``printable`` is true.
    """

    weight: int
    volume: int
    reward: int
    printable: bool = False
    material: Optional[int] = None
    print_time: Optional[int] = None


@dataclass(frozen=True)
class PrinterSpec:
    weight: int
    volume: int
    time_budget: int


@dataclass(frozen=True)
class MaterialSpec:
    weight: int = 1
    volume: int = 1


@dataclass(frozen=True)
class Scenario:
    probability: Fraction
    demand: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "probability", as_rational(self.probability))
        object.__setattr__(self, "demand", tuple(self.demand))


@dataclass(frozen=True)
class Instance:
    items: tuple[Item, ...]
    printer: PrinterSpec
    material: MaterialSpec
    capacity_weight: int
    capacity_volume: int
    alpha: Fraction
    scenarios: tuple[Scenario, ...]

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        object.__setattr__(self, "alpha", as_rational(self.alpha))

    @property
    def n_items(self) -> int:
        return len(self.items)

    @property
    def n_scenarios(self) -> int:
        return len(self.scenarios)

    @property
    def printable_indices(self) -> tuple[int, ...]:
        return tuple(i for i, it in enumerate(self.items) if it.printable)


@dataclass(frozen=True)
class FirstStageDecision:
    item_counts: tuple[int, ...]
    printers: int = 0
    material: int = 0

    def __post_init__(self):
        object.__setattr__(self, "item_counts", tuple(int(a) for a in self.item_counts))

    def as_vector(self) -> tuple[int, ...]:
        return self.item_counts + (self.printers, self.material)


@dataclass(frozen=True)
class PrintPlan:
    """Second-stage decision for one scenario.

    ``prints[i][j]`` is the number of copies of item ``i`` printed on printer
    ``j``; every row has one entry per packed printer. Rows of non-printable
    items must be all zero.
    """

    scenario: int
    matched: tuple[int, ...]
    prints: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "matched", tuple(int(a) for a in self.matched))
        object.__setattr__(self, "prints", tuple(tuple(int(p) for p in row) for row in self.prints))

    def printed_totals(self) -> tuple[int, ...]:
        if not self.prints:
            return (0,) * len(self.matched)
        return tuple(sum(row) for row in self.prints)


def empty_plan(instance: Instance, scenario: int, printers: int = 0) -> PrintPlan:
    n = instance.n_items
    return PrintPlan(scenario, (0,) * n, tuple((0,) * printers for _ in range(n)))


def can_print(item: Item, time_budget: int) -> bool:
    """True when one copy of ``item`` fits on a single printer.

    Shared by the printer bound, the deterministic equivalent and the oracle so
    that all three agree on which demand units are printable at all.
    """
    return item.printable and item.print_time is not None and item.print_time <= time_budget


def as_rational(x) -> Fraction:
    """Exact rational from a Fraction, int, decimal string, ``"p/q"`` string or float.

    Floats are read through their shortest decimal repr, so ``0.7`` becomes
    ``7/10`` rather than the nearest binary fraction.
    """
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def validate_instance(instance: Instance) -> list[Violation]:
    """Return every invariant violation of ``instance``; an empty list means valid."""
    out: list[Violation] = []
    add = lambda code, msg: out.append(Violation(code, msg))  # noqa: E731

    if not instance.items:
        add("no_items", "instance has no items")
    for i, it in enumerate(instance.items):
        for name in ("weight", "volume", "reward"):
            val = getattr(it, name)
            if not _is_int(val):
                add("non_integer", f"item {i} {name}={val!r} is not an integer")
            elif val < 0:
                add("negative_value", f"item {i} {name}={val} < 0")
        if it.printable:
            for name in ("material", "print_time"):
                val = getattr(it, name)
                if val is None:
                    add("missing_print_fields", f"printable item {i} lacks {name}")
                elif not _is_int(val):
                    add("non_integer", f"item {i} {name}={val!r} is not an integer")
                elif val < 0:
                    add("negative_value", f"item {i} {name}={val} < 0")
        elif it.material is not None or it.print_time is not None:
            add("extra_print_fields", f"non-printable item {i} carries print data")

    p = instance.printer
    for name in ("weight", "volume", "time_budget"):
        val = getattr(p, name)
        if not _is_int(val):
            add("non_integer", f"printer {name}={val!r} is not an integer")
        elif val < 0:
            add("negative_value", f"printer {name}={val} < 0")
    mat = instance.material
    for name in ("weight", "volume"):
        val = getattr(mat, name)
        if not _is_int(val):
            add("non_integer", f"material {name}={val!r} is not an integer")
        elif val < 1:
            add("material_nonpositive", f"material {name}={val} must be >= 1")
    for name in ("capacity_weight", "capacity_volume"):
        val = getattr(instance, name)
        if not _is_int(val):
            add("non_integer", f"{name}={val!r} is not an integer")
        elif val < 0:
            add("negative_value", f"{name}={val} < 0")

    if not 0 <= instance.alpha <= 1:
        add("alpha_range", f"alpha={instance.alpha} outside [0, 1]")

    if not instance.scenarios:
        add("no_scenarios", "instance has no scenarios")
    total = Fraction(0)
    for s, sc in enumerate(instance.scenarios):
        total += sc.probability
        if not 0 <= sc.probability <= 1:
            add("probability_range", f"scenario {s} probability {sc.probability} outside [0, 1]")
        if len(sc.demand) != instance.n_items:
            add("demand_length", f"scenario {s} has {len(sc.demand)} demands for {instance.n_items} items")
        for i, d in enumerate(sc.demand):
            if not _is_int(d):
                add("non_integer", f"scenario {s} demand {i}={d!r} is not an integer")
            elif d < 0:
                add("negative_value", f"scenario {s} demand {i}={d} < 0")
    if instance.scenarios and total != 1:
        add("probability_sum", f"scenario probabilities sum to {total}, not 1")
    return out


def check_first_stage(instance: Instance, decision: FirstStageDecision) -> list[Violation]:
    out: list[Violation] = []
    if len(decision.item_counts) != instance.n_items:
        return [Violation("dimension", f"{len(decision.item_counts)} item counts for {instance.n_items} items")]
    if min(decision.as_vector(), default=0) < 0:
        out.append(Violation("negative_value", "first-stage counts must be nonnegative"))
    w = sum(a * it.weight for a, it in zip(decision.item_counts, instance.items))
    w += decision.printers * instance.printer.weight + decision.material * instance.material.weight
    v = sum(a * it.volume for a, it in zip(decision.item_counts, instance.items))
    v += decision.printers * instance.printer.volume + decision.material * instance.material.volume
    if w > instance.capacity_weight:
        out.append(Violation("weight", f"packed weight {w} > {instance.capacity_weight}"))
    if v > instance.capacity_volume:
        out.append(Violation("volume", f"packed volume {v} > {instance.capacity_volume}"))
    if decision.material > 0 and decision.printers < 1:
        out.append(Violation("material_without_printer", "material packed without a printer"))
    return out


def _plan_shape_violations(instance: Instance, plan: PrintPlan, printers: Optional[int]) -> list[Violation]:
    n = instance.n_items
    out = []
    if not 0 <= plan.scenario < instance.n_scenarios:
        return [Violation("scenario_index", f"no scenario {plan.scenario}")]
    if len(plan.matched) != n:
        return [Violation("dimension", f"{len(plan.matched)} matched counts for {n} items")]
    if plan.prints:
        if len(plan.prints) != n:
            return [Violation("dimension", f"{len(plan.prints)} print rows for {n} items")]
        widths = {len(row) for row in plan.prints}
        if len(widths) > 1:
            return [Violation("dimension", "print rows have unequal printer counts")]
        width = widths.pop()
    else:
        width = 0
    if printers is not None and width != printers and any(any(r) for r in plan.prints):
        out.append(Violation("printer_count", f"plan uses {width} printers but {printers} are packed"))
    if min(plan.matched, default=0) < 0 or any(p < 0 for row in plan.prints for p in row):
        out.append(Violation("negative_value", "plan entries must be nonnegative"))
    return out


def _plan_local_violations(instance: Instance, plan: PrintPlan) -> list[Violation]:
    """Constraints that do not depend on the first stage."""
    out = []
    demand = instance.scenarios[plan.scenario].demand
    totals = plan.printed_totals()
    for i, it in enumerate(instance.items):
        if not it.printable and totals[i]:
            out.append(Violation("print_nonprintable", f"item {i} is not printable"))
        if plan.matched[i] + totals[i] > demand[i]:
            out.append(Violation("demand_exceeded", f"item {i}: {plan.matched[i]} + {totals[i]} > demand {demand[i]}"))
    return out


def check_plan_feasible(instance: Instance, decision: FirstStageDecision, plan: PrintPlan) -> list[Violation]:
    """Check every second-stage constraint of ``plan`` under ``decision``."""
    out = _plan_shape_violations(instance, plan, decision.printers)
    if out and out[0].code in ("dimension", "scenario_index"):
        return out
    if len(decision.item_counts) != instance.n_items:
        return [Violation("dimension", "decision and instance disagree on item count")]
    out += _plan_local_violations(instance, plan)
    for i, a in enumerate(plan.matched):
        if a > decision.item_counts[i]:
            out.append(Violation("matched_exceeds_packed", f"item {i}: matched {a} > packed {decision.item_counts[i]}"))
    used = sum(p * (it.material or 0) for it, row in zip(instance.items, plan.prints) for p in row)
    if used > decision.material:
        out.append(Violation("material", f"material used {used} > packed {decision.material}"))
    T = instance.printer.time_budget
    width = len(plan.prints[0]) if plan.prints else 0
    for j in range(width):
        busy = sum(row[j] * (it.print_time or 0) for it, row in zip(instance.items, plan.prints))
        if busy > T:
            out.append(Violation("time", f"printer {j} busy {busy} > {T}"))
    return out


def matched_quantities(decision: FirstStageDecision, scenario: Scenario) -> tuple[int, ...]:
    if len(decision.item_counts) != len(scenario.demand):
        raise ValueError(
            f"dimension mismatch: {len(decision.item_counts)} counts vs {len(scenario.demand)} demands"
        )
    return tuple(min(a, d) for a, d in zip(decision.item_counts, scenario.demand))


def scenario_reward(instance: Instance, plan: PrintPlan) -> Fraction:
    """Reward of one scenario's plan: matched items at full value, prints at ``alpha``."""
    bad = _plan_shape_violations(instance, plan, None)
    if not bad:
        bad = _plan_local_violations(instance, plan)
    if bad:
        raise InfeasiblePlanError(bad)
    physical = sum(a * it.reward for a, it in zip(plan.matched, instance.items))
    printed = sum(p * it.reward for p, it in zip(plan.printed_totals(), instance.items))
    return Fraction(physical) + instance.alpha * printed


def expected_reward(instance: Instance, decision: FirstStageDecision, plans: Sequence[PrintPlan]) -> Fraction:
    by_scenario = {p.scenario: p for p in plans}
    missing = [s for s in range(instance.n_scenarios) if s not in by_scenario]
    if missing:
        raise ValueError(f"missing plans for scenarios {missing}")
    bad = check_first_stage(instance, decision)
    total = Fraction(0)
    for s, sc in enumerate(instance.scenarios):
        plan = by_scenario[s]
        bad = bad + check_plan_feasible(instance, decision, plan)
        if bad:
            raise InfeasiblePlanError(bad)
        total += sc.probability * scenario_reward(instance, plan)
    return total


def demand_reward_bound(instance: Instance) -> Fraction:
    """Expected reward if every demanded unit were met by a physical item."""
    return sum(
        (sc.probability * sum(d * it.reward for d, it in zip(sc.demand, instance.items)) for sc in instance.scenarios),
        Fraction(0),
    )
