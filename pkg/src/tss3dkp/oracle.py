"""Exhaustive reference optimisers for tiny instances.

Nothing here touches the LP or branch-and-bound code. Values are exact
rationals. Enumeration ranges come from the same per-variable bounds the
integer models use, so both sides search the same finite space.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .bounds import printer_upper_bound
from .deteq import big_m, item_count_bound, print_count_bound
from .model import (
    FirstStageDecision,
    Instance,
    Item,
    MaterialSpec,
    PrinterSpec,
    PrintPlan,
    Scenario,
    check_first_stage,
)

__all__ = [
    "OracleLimits",
    "OracleSizeError",
    "brute_force_second_stage",
    "brute_force_full",
    "random_tiny_instance",
    "full_enumeration_size",
]


class OracleSizeError(RuntimeError):
    """The requested enumeration is larger than the configured limit."""


@dataclass(frozen=True)
class OracleLimits:
    max_states: int = 10**8


def _printer_loads(instance: Instance, caps: list[int]) -> list[tuple[int, ...]]:
    """All print-count vectors one printer can finish within its time budget."""
    T = instance.printer.time_budget
    times = [it.print_time or 0 for it in instance.items]
    loads = []
    for vec in itertools.product(*(range(c + 1) for c in caps)):
        if sum(v * t for v, t in zip(vec, times)) <= T:
            loads.append(vec)
    return loads


def brute_force_second_stage(instance: Instance, decision: FirstStageDecision, scenario: int,
                             limits: OracleLimits = OracleLimits()) -> tuple[Fraction, PrintPlan]:
    """Best recourse for one scenario by trying every print assignment."""
    bad = check_first_stage(instance, decision)
    if bad:
        raise ValueError("infeasible first stage: " + "; ".join(map(str, bad)))
    sc = instance.scenarios[scenario]
    d = sc.demand
    n = instance.n_items
    caps = [print_count_bound(instance, i, d[i], decision.material) for i in range(n)]
    loads = _printer_loads(instance, caps)
    size = len(loads) ** decision.printers
    if size > limits.max_states:
        raise OracleSizeError(f"{size} print assignments exceed the limit {limits.max_states}")

    materials = [it.material or 0 for it in instance.items]
    best: Optional[Fraction] = None
    best_plan = None
    for combo in itertools.product(loads, repeat=decision.printers):
        totals = [sum(col) for col in zip(*combo)] if combo else [0] * n
        if any(totals[i] > d[i] for i in range(n)):
            continue
        if sum(t * m for t, m in zip(totals, materials)) > decision.material:
            continue
        matched = [min(decision.item_counts[i], d[i] - totals[i]) for i in range(n)]
        value = sum(a * it.reward for a, it in zip(matched, instance.items)) + instance.alpha * sum(
            t * it.reward for t, it in zip(totals, instance.items))
        value = Fraction(value)
        if best is None or value > best:
            best = value
            prints = tuple(tuple(load[i] for load in combo) for i in range(n))
            best_plan = PrintPlan(scenario, tuple(matched), prints)
    return best, best_plan


def _reachable_totals(instance: Instance, scenario: Scenario, printers: int, material: int) -> list[tuple[int, ...]]:
    """Every print-total vector achievable with ``printers`` printers, capped at demand."""
    d = scenario.demand
    caps = [print_count_bound(instance, i, d[i], material) for i in range(instance.n_items)]
    loads = _printer_loads(instance, caps)
    reach = {(0,) * instance.n_items}
    for _ in range(printers):
        nxt = set()
        for tot in reach:
            for load in loads:
                cand = tuple(a + b for a, b in zip(tot, load))
                if all(c <= di for c, di in zip(cand, d)):
                    nxt.add(cand)
        reach = nxt
    return sorted(reach)


def full_enumeration_size(instance: Instance, max_printers: Optional[int] = None) -> int:
    Z = printer_upper_bound(instance).Z if max_printers is None else max_printers
    first = math.prod(item_count_bound(instance, i) + 1 for i in range(instance.n_items))
    first *= (Z + 1) * (big_m(instance) + 1)
    per_scenario = sum(math.prod(d + 1 for d in sc.demand) for sc in instance.scenarios)
    return first * per_scenario


def brute_force_full(instance: Instance, limits: OracleLimits = OracleLimits(),
                     max_printers: Optional[int] = None) -> tuple[Fraction, FirstStageDecision]:
    """Optimal expected reward over every feasible packing.

    Packings are scanned in lexicographic order of ``(a_1..a_n, a_p, a_b)`` and
    only strict improvements replace the incumbent, so ties resolve to the
    lexicographically smallest packing.
    """
    size = full_enumeration_size(instance, max_printers)
    if size > limits.max_states:
        raise OracleSizeError(f"{size} combined states exceed the limit {limits.max_states}")
    Z = printer_upper_bound(instance).Z if max_printers is None else max_printers
    M = big_m(instance)
    n = instance.n_items
    items = instance.items
    rewards = np.array([it.reward for it in items], dtype=np.int64)
    materials = np.array([it.material or 0 for it in items], dtype=np.int64)
    alpha = instance.alpha
    common = math.lcm(*(sc.probability.denominator for sc in instance.scenarios))
    q_scaled = [int(sc.probability * common) for sc in instance.scenarios]

    # per scenario and printer count: reachable totals sorted by material use,
    # with the printed reward of each
    tables = []
    for sc in instance.scenarios:
        per_p = []
        for ap in range(Z + 1):
            tot = np.array(_reachable_totals(instance, sc, ap, M), dtype=np.int64).reshape(-1, n)
            mat = tot @ materials
            order = np.argsort(mat, kind="stable")
            per_p.append((tot[order], mat[order], tot[order] @ rewards))
        tables.append(per_p)
    demand = [np.array(sc.demand, dtype=np.int64) for sc in instance.scenarios]

    W, V = instance.capacity_weight, instance.capacity_volume
    pw, pv = instance.printer.weight, instance.printer.volume
    mw, mv = instance.material.weight, instance.material.volume
    best_scaled: Optional[int] = None
    best_decision = None
    ranges = [range(item_count_bound(instance, i) + 1) for i in range(n)]
    for a in itertools.product(*ranges):
        wa = sum(x * it.weight for x, it in zip(a, items))
        va = sum(x * it.volume for x, it in zip(a, items))
        if wa > W or va > V:
            continue
        avec = np.array(a, dtype=np.int64)
        for ap in range(Z + 1):
            rw, rv = W - wa - ap * pw, V - va - ap * pv
            if rw < 0 or rv < 0:
                break
            top = min(M, rw // mw, rv // mv) if ap > 0 else 0
            budgets = np.arange(top + 1)
            # scaled objective: common * alpha.denominator * expected reward
            total = np.zeros(top + 1, dtype=object)
            for s, (tot, mat, printed) in enumerate(p[ap] for p in tables):
                phys = np.minimum(avec, demand[s] - tot) @ rewards
                val = phys * alpha.denominator + printed * alpha.numerator
                prefix = np.maximum.accumulate(val)
                idx = np.searchsorted(mat, budgets, side="right") - 1
                total = total + q_scaled[s] * prefix[idx].astype(object)
            k = int(np.argmax(total))
            if best_scaled is None or total[k] > best_scaled:
                best_scaled = int(total[k])
                best_decision = FirstStageDecision(a, ap, k)
    value = Fraction(best_scaled, common * alpha.denominator)
    return value, best_decision


def random_tiny_instance(rng: random.Random, max_items: int = 4, max_scenarios: int = 3,
                         max_demand: int = 3, max_states: int = 10**7) -> Instance:
    """Small random instance for cross-checking the integer models.

    Draws edge cases on purpose (zero rewards, zero print times, weightless
    printers, alpha at 0 or 1) and redraws until the full enumeration stays
    under ``max_states``.
    """
    while True:
        n = rng.randint(1, max_items)
        items = []
        for _ in range(n):
            w, v, r = rng.randint(0, 4), rng.randint(0, 4), rng.randint(0, 6)
            if w == 0 and v == 0:
                w = 1
            if rng.random() < 0.75:
                items.append(Item(w, v, r, True, rng.randint(0, 3), rng.randint(0, 3)))
            else:
                items.append(Item(w, v, r))
        printer = PrinterSpec(rng.randint(0, 4), rng.randint(0, 4), rng.randint(0, 5))
        material = MaterialSpec(rng.randint(1, 2), rng.randint(1, 2))
        S = rng.randint(1, max_scenarios)
        cuts = sorted(rng.randint(1, 9) for _ in range(S - 1))
        edges = [0] + cuts + [10]
        probs = [Fraction(b - a, 10) for a, b in zip(edges, edges[1:])]
        scenarios = [Scenario(p, tuple(rng.randint(0, max_demand) for _ in range(n))) for p in probs]
        alpha = rng.choice([Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(4, 5), Fraction(1)])
        inst = Instance(tuple(items), printer, material, rng.randint(0, 12), rng.randint(0, 12), alpha,
                        tuple(scenarios))
        if full_enumeration_size(inst) <= max_states:
            return inst
