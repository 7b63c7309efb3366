"""Adapter for the HiGHS solver shipped with scipy."""

from __future__ import annotations

import numpy as np

from .model import LinearProgram, LpSolution, LpStatus, NumericalError

_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
    "presolve": True,
}


def available() -> bool:
    try:
        import scipy.optimize  # noqa: F401
    except ImportError:
        return False
    return True


def solve_highs(lp: LinearProgram) -> LpSolution:
    from scipy import sparse
    from scipy.optimize import linprog

    A = lp.sparse()
    lo, hi = np.asarray(lp.row_lo), np.asarray(lp.row_hi)
    eq = lo == hi
    upper = ~eq & np.isfinite(hi)
    lower = ~eq & np.isfinite(lo)

    blocks, rhs = [], []
    if upper.any():
        blocks.append(A[upper])
        rhs.append(hi[upper])
    if lower.any():
        blocks.append(-A[lower])
        rhs.append(-lo[lower])
    A_ub = sparse.vstack(blocks).tocsr() if blocks else None
    b_ub = np.concatenate(rhs) if rhs else None
    A_eq = A[eq] if eq.any() else None
    b_eq = lo[eq] if eq.any() else None
    bounds = np.column_stack([lp.lb, lp.ub])
    bounds = [(None if not np.isfinite(a) else a, None if not np.isfinite(b) else b) for a, b in bounds]

    res = linprog(lp.cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds,
                  method="highs", options=_OPTIONS)
    if res.status == 2:
        return LpSolution(LpStatus.INFEASIBLE, backend="highs")
    if res.status == 3:
        return LpSolution(LpStatus.UNBOUNDED, objective=-np.inf, backend="highs")
    if res.status != 0:
        raise NumericalError(f"HiGHS failed: {res.message}")

    y = np.zeros(lp.num_rows)
    if eq.any():
        y[eq] = res.eqlin.marginals
    k = int(upper.sum())
    if k:
        y[upper] += res.ineqlin.marginals[:k]
    if lower.any():
        y[lower] -= res.ineqlin.marginals[k:]
    x = np.asarray(res.x, dtype=float)
    rc = lp.cost - lp.transpose_product(y)
    return LpSolution(LpStatus.OPTIMAL, objective=float(lp.cost @ x), primal=x, duals=y,
                      reduced_costs=rc, iterations=int(getattr(res, "nit", 0)), backend="highs")
