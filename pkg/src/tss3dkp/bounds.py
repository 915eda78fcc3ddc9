"""Upper bounds on the number of printers worth packing."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .model import Instance, Scenario, can_print

log = logging.getLogger(__name__)

__all__ = ["BoundResult", "printers_needed", "printer_upper_bound", "capacity_cap"]


@dataclass(frozen=True)
class BoundResult:
    """Printer bound summary.

    ``cap_weight`` and ``cap_volume`` are ``math.inf`` when the printer has
    zero weight or volume.
    """

    per_scenario_count: tuple[int, ...]
    U: int
    cap_weight: float | int
    cap_volume: float | int
    Z: int


def printers_needed(instance: Instance, scenario: Scenario) -> int:
    """Greedy printer count that covers all printable demand of one scenario.

    Copies are assigned one at a time in item order to the current printer; a
    fresh printer is opened whenever the next copy would overrun the time
    budget. Units whose print time alone exceeds the budget are skipped.
    """
    T = instance.printer.time_budget
    opened = 0
    busy = 0
    for i, item in enumerate(instance.items):
        if not item.printable or scenario.demand[i] == 0:
            continue
        if not can_print(item, T):
            continue
        for _ in range(scenario.demand[i]):
            if opened == 0 or busy + item.print_time > T:
                opened += 1
                busy = 0
            busy += item.print_time
    return opened


def capacity_cap(capacity: int, per_unit: int) -> float | int:
    return math.inf if per_unit == 0 else capacity // per_unit


def printer_upper_bound(instance: Instance) -> BoundResult:
    T = instance.printer.time_budget
    skipped = [i for i, it in enumerate(instance.items) if it.printable and not can_print(it, T)]
    if skipped:
        log.warning("items %s cannot be printed within the time budget %d; their demand is ignored", skipped, T)
    counts = tuple(printers_needed(instance, sc) for sc in instance.scenarios)
    U = max(counts, default=0)
    cw = capacity_cap(instance.capacity_weight, instance.printer.weight)
    cv = capacity_cap(instance.capacity_volume, instance.printer.volume)
    return BoundResult(counts, U, cw, cv, int(min(cw, cv, U)))
