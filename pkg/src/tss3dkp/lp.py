"""Primal simplex for bounded-variable linear programs.

Problems are maximisations ``max c x`` subject to row constraints
``A x (<=|=|>=) b`` and bounds ``l <= x <= u``. Every row gets a logical
variable ``s`` with ``A x + s = b``; the row relation becomes a bound on ``s``
(``<=``: ``s >= 0``, ``>=``: ``s <= 0``, ``=``: ``s = 0``).

Phase 1 minimises the total bound violation of the basic variables starting
from whatever basis is supplied (the all-logical basis by default, or a basis
inherited from a parent branch-and-bound node). Phase 2 is Dantzig pricing
with a bounded ratio test that breaks near-ties by pivot size. Bland's rule takes over after a long run
of degenerate pivots and the explicit basis inverse is rebuilt periodically.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .model import as_rational

log = logging.getLogger(__name__)

__all__ = [
    "LpProblem",
    "LpOutcome",
    "LpStatus",
    "LpBasis",
    "SimplexSolver",
    "solve_lp",
    "row_residuals",
    "FEAS_TOL",
    "OPT_TOL",
]

FEAS_TOL = 1e-7
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
REFACTOR_EVERY = 100
BLAND_AFTER = 1000

_AT_LOWER, _AT_UPPER, _FREE, _BASIC = 0, 1, 2, 3
SENSES = ("<=", "=", ">=")


class LpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


@dataclass
class LpProblem:
    """A maximisation LP with row relations and variable bounds.

    ``objective`` keeps exact rationals; the solver works on their float
    images. ``upper`` may contain ``inf`` and ``lower`` may contain ``-inf``.
    """

    objective: Sequence
    matrix: sp.spmatrix
    senses: Sequence[str]
    rhs: Sequence
    lower: Sequence
    upper: Sequence
    var_names: Optional[Sequence[str]] = None
    row_names: Optional[Sequence[str]] = None

    def __post_init__(self):
        self.objective = tuple(as_rational(c) for c in self.objective)
        n = len(self.objective)
        self.matrix = sp.csr_matrix(self.matrix, dtype=float)
        if self.matrix.shape[1] != n and self.matrix.shape[0] == 0:
            self.matrix = sp.csr_matrix((0, n))
        m = self.matrix.shape[0]
        self.senses = tuple(self.senses)
        self.rhs = np.asarray(self.rhs, dtype=float).reshape(-1)
        self.lower = np.asarray(self.lower, dtype=float).reshape(-1)
        self.upper = np.asarray(self.upper, dtype=float).reshape(-1)
        if self.matrix.shape != (m, n) or len(self.senses) != m or self.rhs.shape != (m,):
            raise ValueError(f"dimension mismatch: matrix {self.matrix.shape}, {len(self.senses)} senses, "
                             f"{self.rhs.shape[0]} rhs, {n} objective coefficients")
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise ValueError("dimension mismatch: bounds do not match the variable count")
        bad = [s for s in self.senses if s not in SENSES]
        if bad:
            raise ValueError(f"unknown row relation {bad[0]!r}")
        if np.any(self.lower > self.upper):
            j = int(np.argmax(self.lower > self.upper))
            raise ValueError(f"variable {j} has lower bound {self.lower[j]} > upper bound {self.upper[j]}")
        if self.var_names is not None:
            self.var_names = tuple(self.var_names)
            if len(self.var_names) != n:
                raise ValueError("dimension mismatch: var_names")
        if self.row_names is not None:
            self.row_names = tuple(self.row_names)
            if len(self.row_names) != m:
                raise ValueError("dimension mismatch: row_names")

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    def objective_float(self) -> np.ndarray:
        return np.array([float(c) for c in self.objective], dtype=float)


@dataclass
class LpBasis:
    """Basic variable per row plus which nonbasic variables sit at their upper bound.

    Indices ``>= n_vars`` denote row logicals.
    """

    basic: np.ndarray
    at_upper: np.ndarray


@dataclass
class LpOutcome:
    status: LpStatus
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None
    iterations: int = 0
    basis: Optional[LpBasis] = field(default=None, repr=False)


def row_residuals(problem: LpProblem, x: np.ndarray) -> np.ndarray:
    """Row violations of ``x`` after scaling each row by its largest coefficient."""
    A = problem.matrix
    scale = _row_scale(A)
    ax = (A @ x) * scale
    b = problem.rhs * scale
    viol = np.zeros(problem.n_rows)
    for k, sense in enumerate(problem.senses):
        if sense == "<=":
            viol[k] = max(ax[k] - b[k], 0.0)
        elif sense == ">=":
            viol[k] = max(b[k] - ax[k], 0.0)
        else:
            viol[k] = abs(ax[k] - b[k])
    return viol


def _row_scale(A: sp.csr_matrix) -> np.ndarray:
    if A.shape[0] == 0:
        return np.ones(0)
    big = np.asarray(abs(A).max(axis=1).todense()).reshape(-1)
    big[big == 0] = 1.0
    return 1.0 / big


class SimplexSolver:
    """Reusable simplex context for one constraint matrix.

    Branch-and-bound calls :meth:`solve` many times with different variable
    bounds and an inherited basis; the scaled matrix is prepared once.
    """

    def __init__(self, problem: LpProblem, max_iterations: Optional[int] = None):
        self.problem = problem
        n, m = problem.n_vars, problem.n_rows
        self.n, self.m = n, m
        scale = _row_scale(problem.matrix)
        A = sp.diags(scale) @ problem.matrix if m else problem.matrix
        self.A = sp.csc_matrix(A)
        self.AT = sp.csr_matrix(self.A.T)
        self.b = problem.rhs * scale
        self.cost = np.concatenate([problem.objective_float(), np.zeros(m)])
        log_lo = np.array([0.0 if s in ("<=", "=") else -np.inf for s in problem.senses])
        log_hi = np.array([np.inf if s == "<=" else 0.0 for s in problem.senses])
        self._log_lo = log_lo
        self._log_hi = log_hi
        self.max_iterations = max_iterations or max(5000, 50 * (n + m))
        self._last = None  # (basic, inverse) of the last optimal solve

    def _accurate(self, x: np.ndarray, basic: np.ndarray, d: np.ndarray) -> bool:
        """Row residuals and basic reduced costs are both at roundoff level."""
        r = self.b - self.A @ x[: self.n] - x[self.n:]
        return bool(np.abs(r).max(initial=0.0) <= 1e-9 and np.abs(d[basic]).max(initial=0.0) <= 1e-9)

    # -- basis bookkeeping -------------------------------------------------

    def _invert(self, basic: np.ndarray) -> np.ndarray:
        """Basis inverse; only the structural block is inverted densely.

        With logicals basic in rows ``L`` and structurals ``S`` covering the
        remaining rows ``C``, ``x_S = A_CS^-1 r_C`` and ``x_L = r_L - A_LS x_S``.
        """
        m, n = self.m, self.n
        struct = basic < n
        p_s = np.nonzero(struct)[0]
        p_l = np.nonzero(~struct)[0]
        rows_l = basic[p_l] - n
        covered = np.ones(m, dtype=bool)
        covered[rows_l] = False
        C = np.nonzero(covered)[0]
        if C.size != p_s.size:
            raise np.linalg.LinAlgError("basis has repeated logical rows")
        Binv = np.zeros((m, m))
        Binv[p_l, rows_l] = 1.0
        if p_s.size:
            cols = self.A[:, basic[p_s]].tocsr()
            Minv = np.linalg.inv(cols[C].toarray())
            Binv[np.ix_(p_s, C)] = Minv
            if p_l.size:
                Binv[np.ix_(p_l, C)] = -(cols[rows_l] @ Minv)
        return Binv

    def _refactor(self, basic, state, x, lo, hi):
        """Fresh inverse of ``basic``; a numerically singular basis restarts from the slacks."""
        try:
            Binv = self._invert(basic)
        except np.linalg.LinAlgError:
            log.debug("singular basis on refactorisation; restarting from the slack basis")
            basic, state, x = self._slack_basis(lo, hi)
            Binv = np.eye(self.m)
        x[basic] = self._basic_values(x, state, Binv)
        return basic, state, x, Binv

    def _column(self, j: int, Binv: np.ndarray) -> np.ndarray:
        if j >= self.n:
            return Binv[:, j - self.n].copy()
        lo, hi = self.A.indptr[j], self.A.indptr[j + 1]
        return Binv[:, self.A.indices[lo:hi]] @ self.A.data[lo:hi]

    def _basic_values(self, x: np.ndarray, state: np.ndarray, Binv: np.ndarray) -> np.ndarray:
        xn = np.where(state == _BASIC, 0.0, x)
        r = self.b - self.A @ xn[: self.n] - xn[self.n:]
        return Binv @ r

    def _slack_basis(self, lo: np.ndarray, hi: np.ndarray):
        n, m = self.n, self.m
        state = np.full(n + m, _AT_LOWER, dtype=np.int8)
        state[n:] = _BASIC
        basic = np.arange(n, n + m)
        x = np.zeros(n + m)
        for j in range(n):
            if np.isfinite(lo[j]):
                x[j] = lo[j]
            elif np.isfinite(hi[j]):
                state[j] = _AT_UPPER
                x[j] = hi[j]
            else:
                state[j] = _FREE
        return basic, state, x

    def _load_basis(self, basis: LpBasis, lo: np.ndarray, hi: np.ndarray):
        n, m = self.n, self.m
        basic = np.asarray(basis.basic, dtype=np.int64).copy()
        if basic.shape != (m,) or len(set(basic.tolist())) != m:
            raise ValueError("warm-start basis has the wrong shape")
        state = np.where(np.asarray(basis.at_upper, dtype=bool), _AT_UPPER, _AT_LOWER).astype(np.int8)
        state[basic] = _BASIC
        x = np.zeros(n + m)
        nb = state != _BASIC
        lo_ok, hi_ok = np.isfinite(lo), np.isfinite(hi)
        to_upper = nb & hi_ok & ((state == _AT_UPPER) | ~lo_ok)
        to_lower = nb & ~to_upper & lo_ok
        state[nb] = _FREE
        state[to_upper] = _AT_UPPER
        state[to_lower] = _AT_LOWER
        x[to_upper] = hi[to_upper]
        x[to_lower] = lo[to_lower]
        return basic, state, x

    # -- main loop ----------------------------------------------------------

    def solve(self, lower=None, upper=None, basis: Optional[LpBasis] = None) -> LpOutcome:
        n, m = self.n, self.m
        lo = np.concatenate([self.problem.lower if lower is None else np.asarray(lower, float), self._log_lo])
        hi = np.concatenate([self.problem.upper if upper is None else np.asarray(upper, float), self._log_hi])
        if np.any(lo > hi + FEAS_TOL):
            return LpOutcome(LpStatus.INFEASIBLE)

        if basis is None:
            basic, state, x = self._slack_basis(lo, hi)
            Binv = np.eye(m)
        else:
            basic, state, x = self._load_basis(basis, lo, hi)
            try:
                if self._last is not None and np.array_equal(self._last[0], basic):
                    Binv = self._last[1].copy()
                else:
                    Binv = self._invert(basic)
            except np.linalg.LinAlgError:
                basic, state, x = self._slack_basis(lo, hi)
                Binv = np.eye(m)
        x[basic] = self._basic_values(x, state, Binv)

        movable = hi > lo
        cost = self.cost
        iterations = 0
        since_refactor = 0
        degenerate_run = 0
        bland = False
        verified = False

        while True:
            if iterations >= self.max_iterations:
                return LpOutcome(LpStatus.ITERATION_LIMIT, x[:n].copy(), None, iterations)

            xB, loB, hiB = x[basic], lo[basic], hi[basic]
            below = xB < loB - FEAS_TOL
            above = xB > hiB + FEAS_TOL
            phase1 = bool(below.any() or above.any())
            if phase1:
                cB = below.astype(float) - above.astype(float)
                y = cB @ Binv if m else np.zeros(0)
                d = -np.concatenate([self.AT @ y, y])
            else:
                y = cost[basic] @ Binv if m else np.zeros(0)
                d = cost - np.concatenate([self.AT @ y, y])

            inc = movable & ((state == _AT_LOWER) | (state == _FREE)) & (d > OPT_TOL)
            dec = movable & ((state == _AT_UPPER) | (state == _FREE)) & (d < -OPT_TOL)
            score = np.where(inc, d, 0.0) + np.where(dec, -d, 0.0)
            candidates = np.nonzero(score > 0)[0]

            if candidates.size == 0:
                if not verified and since_refactor and not self._accurate(x, basic, d):
                    # rebuild the inverse before trusting a terminal verdict
                    basic, state, x, Binv = self._refactor(basic, state, x, lo, hi)
                    since_refactor = 0
                    verified = True
                    continue
                if phase1:
                    return LpOutcome(LpStatus.INFEASIBLE, None, None, iterations)
                xs = x[:n].copy()
                self._last = (basic.copy(), Binv)
                return LpOutcome(
                    LpStatus.OPTIMAL,
                    xs,
                    float(cost[:n] @ xs),
                    iterations,
                    LpBasis(basic.copy(), state == _AT_UPPER),
                )
            verified = False

            j = int(candidates[0]) if bland else int(candidates[np.argmax(score[candidates])])
            sigma = 1.0 if inc[j] else -1.0
            alpha = self._column(j, Binv) if m else np.zeros(0)
            step = -sigma * alpha

            lim = np.full(m, np.inf)
            hits_upper = np.zeros(m, dtype=bool)
            dn = step < -PIVOT_TOL
            up = step > PIVOT_TOL
            feas = ~(below | above)
            sel = feas & dn
            lim[sel] = (xB[sel] - loB[sel]) / -step[sel]
            sel = feas & up
            lim[sel] = (hiB[sel] - xB[sel]) / step[sel]
            hits_upper[sel] = True
            sel = below & up
            lim[sel] = (loB[sel] - xB[sel]) / step[sel]
            sel = above & dn
            lim[sel] = (xB[sel] - hiB[sel]) / -step[sel]
            hits_upper[sel] = True
            np.maximum(lim, 0.0, out=lim)

            flip = hi[j] - lo[j] if np.isfinite(lo[j]) and np.isfinite(hi[j]) else np.inf
            t_rows = lim.min() if m else np.inf
            t = min(t_rows, flip)
            if not np.isfinite(t):
                if phase1:
                    # numerically useless direction; retry from a fresh factorisation
                    basic, state, x, Binv = self._refactor(basic, state, x, lo, hi)
                    iterations += 1
                    continue
                return LpOutcome(LpStatus.UNBOUNDED, None, None, iterations)

            x[j] += sigma * t
            x[basic] += step * t
            iterations += 1

            if flip <= t_rows:
                state[j] = _AT_UPPER if sigma > 0 else _AT_LOWER
                x[j] = hi[j] if sigma > 0 else lo[j]
            else:
                # near-ties go to the largest pivot for stability
                tied = np.nonzero(lim <= t_rows + 1e-9)[0]
                if bland:
                    r = int(tied[np.argmin(basic[tied])])
                else:
                    r = int(tied[np.argmax(np.abs(alpha[tied]))])
                leaving = basic[r]
                if hits_upper[r]:
                    state[leaving] = _AT_UPPER
                    x[leaving] = hi[leaving]
                else:
                    state[leaving] = _AT_LOWER
                    x[leaving] = lo[leaving]
                basic[r] = j
                state[j] = _BASIC
                pivot_row = Binv[r] / alpha[r]
                touched = np.nonzero(alpha)[0]  # alpha is sparse on block-structured models
                Binv[touched] -= np.outer(alpha[touched], pivot_row)
                Binv[r] = pivot_row
                since_refactor += 1

            if t <= 1e-12:
                degenerate_run += 1
                if degenerate_run >= BLAND_AFTER:
                    bland = True
            else:
                degenerate_run = 0
                bland = False

            if since_refactor >= REFACTOR_EVERY:
                basic, state, x, Binv = self._refactor(basic, state, x, lo, hi)
                since_refactor = 0


def solve_lp(problem: LpProblem, basis: Optional[LpBasis] = None, max_iterations: Optional[int] = None) -> LpOutcome:
    """Solve ``problem`` from the all-logical basis (or ``basis`` when given)."""
    return SimplexSolver(problem, max_iterations).solve(basis=basis)


def exact_objective(problem: LpProblem, x: Sequence) -> Fraction:
    """Objective as a rational; float entries are taken at their exact binary value."""
    return sum((c * (v if isinstance(v, int) else Fraction(v)) for c, v in zip(problem.objective, x) if v),
               Fraction(0))
