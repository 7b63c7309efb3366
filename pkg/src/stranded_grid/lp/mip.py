"""Depth-first branch-and-bound on top of the LP backends.

Branching picks the most fractional integer variable (ties go to the lowest
variable index) and explores the child on the side the LP value rounds to
first, so results are reproducible for a given backend.
"""

from __future__ import annotations

import math

import numpy as np

from .model import TOLERANCES, LpStatus, MipError, MipSolution, MixedIntegerProgram


def solve_mip(mip: MixedIntegerProgram, gap_tol: float | None = None, backend: str | None = None,
              max_nodes: int = 20000) -> MipSolution:
    from . import solve_lp

    gap_tol = TOLERANCES.mip_gap if gap_tol is None else gap_tol
    int_tol = TOLERANCES.integrality
    lp = mip.lp
    ints = np.asarray(sorted(mip.integer), dtype=np.int64)

    incumbent = None
    inc_obj = math.inf
    pruned_bound = math.inf
    nodes = 0
    exhausted = False

    def slack(obj):
        return gap_tol * max(1.0, abs(obj))

    # node = (lb, ub, bound inherited from parent)
    stack = [(lp.lb.copy(), lp.ub.copy(), -math.inf)]
    while stack:
        lb, ub, parent = stack.pop()
        if parent >= inc_obj - slack(inc_obj):
            pruned_bound = min(pruned_bound, parent)
            continue
        if nodes >= max_nodes:
            exhausted = True
            pruned_bound = min([pruned_bound, parent] + [p for _, _, p in stack])
            break
        nodes += 1
        sol = solve_lp(lp.with_bounds(slice(None), lb=lb, ub=ub), backend=backend)
        if sol.status is LpStatus.INFEASIBLE:
            continue
        if sol.status is LpStatus.UNBOUNDED:
            raise MipError("LP relaxation is unbounded")
        obj = sol.objective
        if obj >= inc_obj - slack(inc_obj):
            pruned_bound = min(pruned_bound, obj)
            continue

        vals = sol.primal[ints]
        frac = np.abs(vals - np.round(vals))
        if frac.max(initial=0.0) <= int_tol:
            x = sol.primal.copy()
            x[ints] = np.round(vals)
            incumbent, inc_obj = x, float(lp.cost @ x)
            continue

        k = int(np.argmax(frac))  # first maximum = lowest variable index
        j = int(ints[k])
        v = sol.primal[j]
        down_ub = ub.copy()
        down_ub[j] = math.floor(v)
        up_lb = lb.copy()
        up_lb[j] = math.ceil(v)
        down = (lb, down_ub, obj)
        up = (up_lb, ub, obj)
        if v - math.floor(v) > 0.5:
            stack.extend([down, up])
        else:
            stack.extend([up, down])

    if incumbent is None:
        if exhausted:
            raise MipError(f"node budget {max_nodes} exhausted without an incumbent")
        raise MipError("mixed-integer program is infeasible")
    best_bound = min(pruned_bound, inc_obj)
    gap = max(0.0, (inc_obj - best_bound) / max(1.0, abs(inc_obj)))
    return MipSolution(LpStatus.OPTIMAL, inc_obj, incumbent, gap, nodes,
                       budget_exhausted=exhausted, best_bound=best_bound)
