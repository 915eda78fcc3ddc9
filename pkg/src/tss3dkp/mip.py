"""LP-based branch-and-bound for pure integer programs (maximisation)."""

from __future__ import annotations

import enum
import heapq
import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .lp import LpBasis, LpProblem, LpStatus, SimplexSolver, exact_objective, row_residuals

__all__ = [
    "MipProblem",
    "MipParams",
    "MipResult",
    "MipStatus",
    "relative_gap",
    "solve_mip",
    "INT_TOL",
]

INT_TOL = 1e-6
GAP_FLOOR = 1e-10
_GAP_FLOOR_EXACT = Fraction(1, 10**10)


class MipStatus(str, enum.Enum):
    OPTIMAL_WITHIN_GAP = "optimal_within_gap"
    NODE_LIMIT = "node_limit"
    TIME_LIMIT = "time_limit"
    INFEASIBLE = "infeasible"


@dataclass
class MipProblem:
    """Integer program over ``lp``.

    ``priority`` ranks variables for branching: only fractional variables of
    the highest fractional rank are candidates. Uniform by default.
    """

    lp: LpProblem
    integer: Sequence[bool] = None
    priority: Sequence[int] = None

    def __post_init__(self):
        if self.integer is None:
            self.integer = (True,) * self.lp.n_vars
        self.integer = tuple(bool(f) for f in self.integer)
        if len(self.integer) != self.lp.n_vars:
            raise ValueError("dimension mismatch: integrality flags")
        if self.priority is None:
            self.priority = (0,) * self.lp.n_vars
        self.priority = tuple(int(p) for p in self.priority)
        if len(self.priority) != self.lp.n_vars:
            raise ValueError("dimension mismatch: branching priorities")


@dataclass(frozen=True)
class MipParams:
    relative_gap: Fraction = Fraction(1, 1000)
    node_limit: float = math.inf
    time_limit: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "relative_gap", Fraction(self.relative_gap))
        if self.relative_gap < 0:
            raise ValueError("relative_gap must be nonnegative")


@dataclass
class MipResult:
    status: MipStatus
    x: Optional[tuple]  # ints, with floats in continuous columns
    lower_bound: Optional[Fraction]
    upper_bound: Optional[float]
    gap: float | Fraction
    nodes: int
    branches: int
    root_bound: Optional[float] = None
    lp_iterations: int = field(default=0, repr=False)

    @property
    def objective(self) -> Optional[Fraction]:
        return self.lower_bound

    @property
    def has_incumbent(self) -> bool:
        return self.x is not None


def relative_gap(lb, ub) -> float | Fraction:
    """``(ub - lb) / max(|lb|, 1e-10)``; infinite without an incumbent."""
    if lb is None or ub == math.inf:
        return math.inf
    lb = Fraction(lb)
    ub = Fraction(ub)
    return (ub - lb) / max(abs(lb), _GAP_FLOOR_EXACT)


@dataclass(order=True)
class _Node:
    key: tuple
    lower: np.ndarray = field(compare=False)
    upper: np.ndarray = field(compare=False)
    bound: float = field(compare=False)
    depth: int = field(compare=False)
    basis: Optional[LpBasis] = field(compare=False, default=None)


def _branch_variable(x: np.ndarray, integer: np.ndarray, priority: np.ndarray) -> Optional[int]:
    frac = np.abs(x - np.round(x))
    frac[~integer] = 0.0
    fractional = frac > INT_TOL
    if not fractional.any():
        return None
    frac[priority < priority[fractional].max()] = 0.0
    return int(np.argmax(frac))  # argmax returns the lowest index among ties


def _prune_margin(lb: Fraction) -> float:
    return 1e-9 * max(1.0, abs(float(lb)))


def solve_mip(problem: MipProblem, params: MipParams = MipParams()) -> MipResult:
    """Branch-and-bound with the relative-gap stopping rule.

    Nodes are explored depth first (down branch first) until the first
    incumbent is found. After that each dive follows the down branch while the
    up branch waits in a best-bound queue, and a new dive starts from the best
    open node. A node is pruned only when its
    relaxation value does not exceed the incumbent value.
    """
    lp = problem.lp
    integer = np.array(problem.integer, dtype=bool)
    priority = np.array(problem.priority, dtype=np.int64)
    solver = SimplexSolver(lp)
    start = time.perf_counter()
    seq = itertools.count()

    incumbent: Optional[tuple] = None
    lb: Optional[Fraction] = None
    nodes = branches = lp_iters = 0
    root_bound: Optional[float] = None

    root_lo = lp.lower.copy()
    root_hi = lp.upper.copy()
    root_hi[integer] = np.floor(root_hi[integer] + INT_TOL)
    root_lo[integer] = np.ceil(root_lo[integer] - INT_TOL)
    dive: list[_Node] = [_Node((0,), root_lo, root_hi, math.inf, 0)]
    heap: list[_Node] = []

    def open_bound() -> float:
        b = -heap[0].key[0] if heap else -math.inf
        if dive:
            b = max(b, max(nd.bound for nd in dive))
        return b

    def finish(status: MipStatus) -> MipResult:
        ub = open_bound()
        if lb is not None:
            ub = max(ub, float(lb))
        gap = relative_gap(lb, ub) if lb is not None else math.inf
        if lb is not None and not heap and not dive:
            gap = Fraction(0)
        return MipResult(status, incumbent, lb, ub if math.isfinite(ub) else None, gap,
                         nodes, branches, root_bound, lp_iters)

    while dive or heap:
        if lb is not None and relative_gap(lb, max(open_bound(), float(lb))) <= params.relative_gap:
            break
        if nodes >= params.node_limit:
            return finish(MipStatus.NODE_LIMIT)
        if time.perf_counter() - start > params.time_limit:
            return finish(MipStatus.TIME_LIMIT)

        node = dive.pop() if dive else heapq.heappop(heap)
        if lb is not None and node.bound <= float(lb) + _prune_margin(lb):
            continue

        out = solver.solve(node.lower, node.upper, node.basis)
        nodes += 1
        lp_iters += out.iterations
        if out.status == LpStatus.UNBOUNDED:
            raise ValueError("LP relaxation is unbounded; every integer variable needs a finite bound")
        if out.status == LpStatus.ITERATION_LIMIT:
            raise RuntimeError("simplex iteration limit exceeded at a branch-and-bound node")
        if out.status == LpStatus.INFEASIBLE:
            continue
        value = min(out.objective, node.bound)
        if root_bound is None:
            root_bound = out.objective
        if lb is not None and value <= float(lb) + _prune_margin(lb):
            continue

        j = _branch_variable(out.x, integer, priority)
        if j is None:
            xi = np.where(integer, np.round(out.x), out.x)
            if row_residuals(lp, xi).max(initial=0.0) > 1e-6:
                raise RuntimeError("rounded incumbent violates a constraint")
            cand = tuple(int(v) if f else float(v) for v, f in zip(xi, integer))
            obj = exact_objective(lp, cand)
            if lb is None or obj > lb:
                lb, incumbent = obj, cand
                if dive:
                    for nd in dive:
                        nd.key = (-nd.bound, next(seq))
                        heapq.heappush(heap, nd)
                    dive.clear()
            continue

        branches += 1
        v = out.x[j]
        down_hi = node.upper.copy()
        down_hi[j] = math.floor(v)
        up_lo = node.lower.copy()
        up_lo[j] = math.ceil(v)
        down = _Node((-value, next(seq)), node.lower, down_hi, value, node.depth + 1, out.basis)
        up = _Node((-value, next(seq)), up_lo, node.upper, value, node.depth + 1, out.basis)
        if lb is None:
            dive.append(up)
            dive.append(down)
        else:
            # plunge: continue with the down child, park the sibling
            heapq.heappush(heap, up)
            dive.append(down)

    if incumbent is None:
        return MipResult(MipStatus.INFEASIBLE, None, None, None, math.inf, nodes, branches, root_bound, lp_iters)
    return finish(MipStatus.OPTIMAL_WITHIN_GAP)
