"""Compile instances into integer programs and map solutions back.

``build_det_equiv`` instantiates the second stage once per scenario for ``Z``
candidate printers, with binary ``y_j`` marking which printers are packed.
``build_second_stage`` is the recourse problem for a fixed packing.

Variable upper bounds are tightened where doing so cannot cut off an optimal
solution:

* ``a_i`` never needs to exceed the largest demand for item ``i``, because
  extra copies earn nothing;
* ``a_b`` is limited by what fits, ``M = min(W // w_b, V // v_b)``;
* a print count is limited by demand, by how many copies fit in one printer's
  time budget, and by how many copies the material budget allows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import scipy.sparse as sp

from .bounds import capacity_cap
from .lp import LpProblem
from .mip import INT_TOL, MipParams, MipProblem, MipResult, MipStatus, solve_mip
from .model import (
    FirstStageDecision,
    Instance,
    PrintPlan,
    Scenario,
    can_print,
    check_first_stage,
    check_plan_feasible,
)

__all__ = [
    "VariableMap",
    "big_m",
    "build_det_equiv",
    "build_second_stage",
    "evaluate_first_stage",
    "extract_solution",
    "second_stage_value",
    "item_count_bound",
    "print_count_bound",
    "SolveError",
]


class SolveError(RuntimeError):
    """A model could not be solved to the requested accuracy."""


@dataclass(frozen=True)
class VariableMap:
    """Positions of the domain variables inside the solver vector.

    ``matched[s][i]`` indexes ``a_i^s``; ``prints[s][i]`` lists the indices of
    ``p_ij^s`` over printers ``j`` (empty for non-printable items). In a
    second-stage map there is a single scenario slot, ``scenario_ids`` says
    which instance scenario it is, and the first-stage slots are empty.
    """

    n_vars: int
    items: tuple[int, ...]
    material: Optional[int]
    printers: tuple[int, ...]
    matched: tuple[tuple[int, ...], ...]
    prints: tuple[tuple[tuple[int, ...], ...], ...]
    scenario_ids: tuple[int, ...]
    names: tuple[str, ...]
    instance: Instance = field(compare=False, repr=False)
    decision: Optional[FirstStageDecision] = field(default=None, compare=False)


def big_m(instance: Instance) -> int:
    wb, vb = instance.material.weight, instance.material.volume
    if wb <= 0 and vb <= 0:
        raise ValueError("material has zero weight and volume; the material bound is undefined")
    return int(min(capacity_cap(instance.capacity_weight, wb), capacity_cap(instance.capacity_volume, vb)))


def item_count_bound(instance: Instance, i: int) -> int:
    it = instance.items[i]
    most = max((sc.demand[i] for sc in instance.scenarios), default=0)
    return int(min(capacity_cap(instance.capacity_weight, it.weight),
                   capacity_cap(instance.capacity_volume, it.volume), most))


def print_count_bound(instance: Instance, i: int, demand: int, material: int) -> int:
    it = instance.items[i]
    T = instance.printer.time_budget
    if not can_print(it, T):
        return 0
    by_time = T // it.print_time if it.print_time > 0 else demand
    by_material = material // it.material if it.material > 0 else demand
    return int(min(demand, by_time, by_material))


PRIORITY_PRINTERS = 2
PRIORITY_PACKING = 1


class _Builder:
    def __init__(self):
        self.obj: list[Fraction] = []
        self.lo: list[float] = []
        self.hi: list[float] = []
        self.names: list[str] = []
        self.rows: list[dict[int, int]] = []
        self.senses: list[str] = []
        self.rhs: list[int] = []
        self.row_names: list[str] = []
        self.priority: list[int] = []

    def var(self, name: str, ub, obj=Fraction(0), lb=0, priority=0) -> int:
        self.priority.append(priority)
        self.obj.append(Fraction(obj))
        self.lo.append(lb)
        self.hi.append(ub)
        self.names.append(name)
        return len(self.obj) - 1

    def row(self, name: str, coefs: dict[int, int], sense: str, rhs) -> None:
        coefs = {k: v for k, v in coefs.items() if v}
        self.rows.append(coefs)
        self.senses.append(sense)
        self.rhs.append(rhs)
        self.row_names.append(name)

    def problem(self) -> MipProblem:
        n = len(self.obj)
        r, c, v = [], [], []
        for k, coefs in enumerate(self.rows):
            for j, a in coefs.items():
                r.append(k)
                c.append(j)
                v.append(a)
        A = sp.csr_matrix((v, (r, c)), shape=(len(self.rows), n))
        lp = LpProblem(self.obj, A, self.senses, self.rhs, self.lo, self.hi, self.names, self.row_names)
        return MipProblem(lp, (True,) * n, self.priority)


def _scenario_block(b: _Builder, instance: Instance, sc: Scenario, weight: Fraction, n_printers: int,
                    material_cap: int, matched_cap: Sequence[int], suffix: str):
    """Add ``a_i^s``, ``p_ij^s`` and the demand rows of one scenario."""
    alpha = instance.alpha
    matched, prints = [], []
    for i, it in enumerate(instance.items):
        matched.append(b.var(f"as_{i + 1}{suffix}", min(matched_cap[i], sc.demand[i]), weight * it.reward))
        row = []
        if it.printable:
            ub = print_count_bound(instance, i, sc.demand[i], material_cap)
            for j in range(n_printers):
                row.append(b.var(f"p_{i + 1}_{j + 1}{suffix}", ub, weight * alpha * it.reward))
        prints.append(tuple(row))

    for i, it in enumerate(instance.items):
        coefs = {matched[i]: 1}
        for p in prints[i]:
            coefs[p] = 1
        b.row(f"dem_{i + 1}{suffix}", coefs, "<=", sc.demand[i])
    return matched, prints


def build_det_equiv(instance: Instance, Z: int, allow_printers: bool = True,
                    symmetry: bool = True) -> tuple[MipProblem, VariableMap]:
    """Deterministic equivalent with ``Z`` candidate printers.

    ``allow_printers=False`` fixes every ``y_j`` and ``a_b`` to zero.
    ``symmetry=False`` omits the ``y_j <= y_{j-1}`` ordering rows.
    """
    if Z < 0 or int(Z) != Z:
        raise ValueError(f"printer bound Z={Z} must be a nonnegative integer")
    Z = int(Z)
    M = big_m(instance)
    b = _Builder()
    # branch on printers first, then the rest of the packing, recourse last
    items = tuple(b.var(f"a_{i + 1}", item_count_bound(instance, i), priority=PRIORITY_PACKING)
                  for i in range(instance.n_items))
    mat = b.var("a_b", M if allow_printers else 0, priority=PRIORITY_PACKING)
    ys = tuple(b.var(f"y_{j + 1}", 1 if allow_printers else 0, priority=PRIORITY_PRINTERS) for j in range(Z))

    caps = [item_count_bound(instance, i) for i in range(instance.n_items)]
    matched, prints = [], []
    for s, sc in enumerate(instance.scenarios):
        m_s, p_s = _scenario_block(b, instance, sc, sc.probability, Z, M, caps, f"_s{s + 1}")
        matched.append(tuple(m_s))
        prints.append(tuple(p_s))

    it = instance.items
    W = {k: a.weight for k, a in zip(items, it)}
    W[mat] = instance.material.weight
    V = {k: a.volume for k, a in zip(items, it)}
    V[mat] = instance.material.volume
    for y in ys:
        W[y] = instance.printer.weight
        V[y] = instance.printer.volume
    b.row("cap_weight", W, "<=", instance.capacity_weight)
    b.row("cap_volume", V, "<=", instance.capacity_volume)
    link = {mat: 1}
    for y in ys:
        link[y] = -M
    b.row("big_m", link, "<=", 0)

    T = instance.printer.time_budget
    for s, sc in enumerate(instance.scenarios):
        sfx = f"_s{s + 1}"
        for i in range(instance.n_items):
            b.row(f"match_{i + 1}{sfx}", {matched[s][i]: 1, items[i]: -1}, "<=", 0)
        b.row(f"mat{sfx}", {**{p: it[i].material for i in range(instance.n_items) for p in prints[s][i]}, mat: -1},
              "<=", 0)
        for j, y in enumerate(ys):
            coefs = {prints[s][i][j]: it[i].print_time for i in range(instance.n_items) if prints[s][i]}
            coefs[y] = -T
            b.row(f"time_{j + 1}{sfx}", coefs, "<=", 0)
            # zero-time prints are otherwise not tied to a packed printer
            for i in range(instance.n_items):
                if prints[s][i] and it[i].print_time == 0:
                    b.row(f"link_{i + 1}_{j + 1}{sfx}", {prints[s][i][j]: 1, y: -sc.demand[i]}, "<=", 0)
    if symmetry:
        for j in range(1, Z):
            b.row(f"sym_{j + 1}", {ys[j]: 1, ys[j - 1]: -1}, "<=", 0)

    problem = b.problem()
    vmap = VariableMap(len(b.obj), items, mat, ys, tuple(matched), tuple(prints),
                       tuple(range(instance.n_scenarios)), tuple(b.names), instance)
    return problem, vmap


def build_second_stage(instance: Instance, decision: FirstStageDecision,
                       scenario: Scenario | int) -> tuple[MipProblem, VariableMap]:
    """Recourse problem for one scenario with the first stage fixed."""
    bad = check_first_stage(instance, decision)
    if bad:
        raise ValueError("infeasible first stage: " + "; ".join(map(str, bad)))
    if isinstance(scenario, int):
        s = scenario
        scenario = instance.scenarios[s]
    else:
        s = instance.scenarios.index(scenario)
    n_p = decision.printers
    b = _Builder()
    matched, prints = _scenario_block(b, instance, scenario, Fraction(1), n_p, decision.material,
                                      decision.item_counts, "")
    it = instance.items
    for i in range(instance.n_items):
        b.row(f"match_{i + 1}", {matched[i]: 1}, "<=", decision.item_counts[i])
    b.row("mat", {p: it[i].material for i in range(instance.n_items) for p in prints[i]}, "<=", decision.material)
    T = instance.printer.time_budget
    for j in range(n_p):
        b.row(f"time_{j + 1}", {prints[i][j]: it[i].print_time for i in range(instance.n_items) if prints[i]},
              "<=", T)
    problem = b.problem()
    vmap = VariableMap(len(b.obj), (), None, (), (tuple(matched),), (tuple(prints),), (s,),
                       tuple(b.names), instance, decision)
    return problem, vmap


def _integral(x: Sequence, n_vars: int) -> list[int]:
    if len(x) != n_vars:
        raise ValueError(f"dimension mismatch: solution has {len(x)} entries, map expects {n_vars}")
    out = []
    for k, v in enumerate(x):
        r = round(float(v))
        if abs(float(v) - r) > INT_TOL:
            raise SolveError(f"internal error: variable {k} has non-integral value {v}")
        out.append(int(r))
    return out


def _plan(vmap: VariableMap, x: list[int], slot: int, packed: Sequence[int]) -> PrintPlan:
    matched = tuple(x[k] for k in vmap.matched[slot])
    rows = []
    for cols in vmap.prints[slot]:
        rows.append(tuple(x[cols[j]] for j in packed) if cols else (0,) * len(packed))
    return PrintPlan(vmap.scenario_ids[slot], matched, tuple(rows))


def extract_solution(result: MipResult | Sequence, vmap: VariableMap):
    """Rebuild the first stage and per-scenario plans from a solver vector.

    Returns ``(decision, plans)`` for a deterministic-equivalent map and
    ``(decision, plan)`` for a second-stage map. Packed printers are renumbered
    consecutively. The rebuilt objects are re-checked against the instance.
    """
    raw = result.x if isinstance(result, MipResult) else result
    if raw is None:
        raise ValueError("result has no incumbent")
    x = _integral(raw, vmap.n_vars)
    instance = vmap.instance
    if vmap.decision is not None:
        decision = vmap.decision
        plan = _plan(vmap, x, 0, range(decision.printers))
        bad = check_plan_feasible(instance, decision, plan)
        if bad:
            raise SolveError("extracted plan is infeasible: " + "; ".join(map(str, bad)))
        return decision, plan

    packed = [j for j, y in enumerate(vmap.printers) if x[y] == 1]
    decision = FirstStageDecision(tuple(x[k] for k in vmap.items), len(packed), x[vmap.material])
    plans = [_plan(vmap, x, slot, packed) for slot in range(len(vmap.scenario_ids))]
    bad = check_first_stage(instance, decision)
    for plan in plans:
        bad += check_plan_feasible(instance, decision, plan)
    if bad:
        raise SolveError("extracted solution is infeasible: " + "; ".join(map(str, bad)))
    return decision, plans


def second_stage_value(instance: Instance, decision: FirstStageDecision, scenario: int,
                       params: MipParams = MipParams()) -> tuple[Fraction, PrintPlan]:
    problem, vmap = build_second_stage(instance, decision, scenario)
    exact = MipParams(Fraction(0), params.node_limit, params.time_limit)
    res = solve_mip(problem, exact)
    if res.status != MipStatus.OPTIMAL_WITHIN_GAP:
        raise SolveError(f"second stage for scenario {scenario} ended with status {res.status.value}")
    _, plan = extract_solution(res, vmap)
    return res.objective, plan


def evaluate_first_stage(instance: Instance, decision: FirstStageDecision,
                         params: MipParams = MipParams()) -> Fraction:
    """Expected recourse value of a fixed packing, every scenario solved exactly."""
    total = Fraction(0)
    for s, sc in enumerate(instance.scenarios):
        value, _ = second_stage_value(instance, decision, s, params)
        total += sc.probability * value
    return total
