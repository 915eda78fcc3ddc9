"""Simplex engine against scipy's HiGHS on random bounded LPs."""

import numpy as np
import pytest
import scipy.optimize as so

from tss3dkp.lp import LpProblem, LpStatus, SimplexSolver, row_residuals, solve_lp

_SCIPY_STATUS = {0: LpStatus.OPTIMAL, 2: LpStatus.INFEASIBLE, 3: LpStatus.UNBOUNDED}


def random_lp(rng):
    m, n = rng.integers(1, 12), rng.integers(1, 12)
    A = rng.integers(-5, 6, (m, n)) * (rng.random((m, n)) < 0.6)
    senses = rng.choice(["<=", ">=", "="], m, p=[0.6, 0.25, 0.15])
    b = rng.integers(-5, 20, m)
    c = rng.integers(-5, 6, n)
    lo = rng.integers(-3, 2, n).astype(float)
    hi = lo + rng.integers(0, 8, n)
    hi[rng.random(n) < 0.2] = np.inf
    return LpProblem(c, A, senses, b, lo, hi)


def reference(P):
    A = P.matrix.toarray()
    ub, bub, eq, beq = [], [], [], []
    for r, s in enumerate(P.senses):
        if s == "<=":
            ub.append(A[r]); bub.append(P.rhs[r])
        elif s == ">=":
            ub.append(-A[r]); bub.append(-P.rhs[r])
        else:
            eq.append(A[r]); beq.append(P.rhs[r])
    bounds = [(lo, None if np.isinf(hi) else hi) for lo, hi in zip(P.lower, P.upper)]
    R = so.linprog(-P.objective_float(), A_ub=ub or None, b_ub=bub or None, A_eq=eq or None,
                   b_eq=beq or None, bounds=bounds, method="highs")
    return _SCIPY_STATUS[R.status], (-R.fun if R.status == 0 else None)


@pytest.mark.parametrize("seed", range(4))
def test_matches_highs(seed):
    rng = np.random.default_rng(seed)
    for _ in range(60):
        P = random_lp(rng)
        out = solve_lp(P)
        status, value = reference(P)
        assert out.status == status
        if status == LpStatus.OPTIMAL:
            assert out.objective == pytest.approx(value, abs=1e-6)
            assert row_residuals(P, out.x).max(initial=0.0) <= 1e-7
            assert np.all(out.x >= P.lower - 1e-7) and np.all(out.x <= P.upper + 1e-7)


def test_warm_start_agrees_with_cold_start():
    rng = np.random.default_rng(11)
    checked = 0
    for _ in range(150):
        P = random_lp(rng)
        solver = SimplexSolver(P)
        first = solver.solve()
        if first.status != LpStatus.OPTIMAL:
            continue
        j = rng.integers(P.n_vars)
        hi = P.upper.copy()
        hi[j] = max(np.floor(first.x[j]) - 1, P.lower[j])
        warm = solver.solve(None, hi, first.basis)
        cold = SimplexSolver(P).solve(None, hi)
        assert warm.status == cold.status
        if cold.status == LpStatus.OPTIMAL:
            assert warm.objective == pytest.approx(cold.objective, abs=1e-6)
        checked += 1
    assert checked >= 40


def test_free_and_fixed_variables():
    # x fixed at 4 forces the free y to 3
    P = LpProblem([1, 1], [[1, -1]], ["="], [1], [4, -np.inf], [4, np.inf])
    out = solve_lp(P)
    assert out.status == LpStatus.OPTIMAL
    assert out.x.tolist() == pytest.approx([4, 3])


def test_unbounded_and_infeasible():
    assert solve_lp(LpProblem([1], [[1]], [">="], [0], [0], [np.inf])).status == LpStatus.UNBOUNDED
    assert solve_lp(LpProblem([1], [[1]], ["<="], [-1], [0], [5])).status == LpStatus.INFEASIBLE


def test_no_rows():
    out = solve_lp(LpProblem([2, -1], np.zeros((0, 2)), [], [], [0, 0], [3, 3]))
    assert out.objective == 6


def test_dimension_errors():
    with pytest.raises(ValueError, match="dimension"):
        LpProblem([1, 1], [[1]], ["<="], [1], [0, 0], [1, 1])
    with pytest.raises(ValueError, match="relation"):
        LpProblem([1], [[1]], ["<"], [1], [0], [1])
