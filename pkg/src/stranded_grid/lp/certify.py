"""Optimality certificates for LP solutions.

A solution is accepted when the primal point is feasible, the dual point
(row duals plus the implied reduced costs) is sign-consistent with the
bounds it prices, the primal and dual objectives agree, and complementary
slackness holds. Residuals are normalized per row by ``1 + |bound|``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import TOLERANCES, LinearProgram, LpError, LpSolution, Tolerances


class CertificateError(LpError):
    """An Optimal solution failed its optimality certificate."""


@dataclass
class Certificate:
    primal_residual: float
    dual_objective: float
    duality_gap: float
    complementarity: float
    ok: bool
    reason: str = ""


def _bound_distance(value, lo, hi, sign):
    """Distance from ``value`` to the bound a multiplier of ``sign`` prices
    (positive multipliers price the lower bound)."""
    bound = np.where(sign > 0, lo, hi)
    with np.errstate(invalid="ignore"):
        dist = np.abs(value - bound) / (1.0 + np.abs(bound))
    return np.where(np.isfinite(bound), dist, np.inf), bound


def certify(lp: LinearProgram, sol: LpSolution, tol: Tolerances = TOLERANCES) -> Certificate:
    x = sol.primal
    y = sol.duals
    act = lp.activity(x)
    rc = lp.cost - lp.transpose_product(y)

    def viol(v, lo, hi):
        below = np.where(np.isfinite(lo), (lo - v) / (1.0 + np.abs(np.where(np.isfinite(lo), lo, 0))), 0.0)
        above = np.where(np.isfinite(hi), (v - hi) / (1.0 + np.abs(np.where(np.isfinite(hi), hi, 0))), 0.0)
        return np.maximum(np.maximum(below, above), 0.0)

    primal_res = float(max(viol(act, lp.row_lo, lp.row_hi).max(initial=0.0),
                           viol(x, lp.lb, lp.ub).max(initial=0.0)))

    scale = 1.0 + np.abs(lp.cost).max(initial=0.0)
    zero = 1e-9 * scale

    # multipliers that are numerically nonzero must sit on the bound they price
    row_nz = np.abs(y) > zero
    col_nz = np.abs(rc) > zero
    row_dist, row_bound = _bound_distance(act, lp.row_lo, lp.row_hi, np.sign(y))
    col_dist, col_bound = _bound_distance(x, lp.lb, lp.ub, np.sign(rc))
    comp = float(max(row_dist[row_nz].max(initial=0.0), col_dist[col_nz].max(initial=0.0)))

    # dual objective: each multiplier times the bound it prices; multipliers
    # below the zero threshold are valued at the primal activity instead
    row_term = np.where(row_nz, y * np.where(row_nz, row_bound, 0.0), y * act)
    col_term = np.where(col_nz, rc * np.where(col_nz, col_bound, 0.0), rc * x)
    dual_obj = float(row_term.sum() + col_term.sum())
    primal_obj = float(lp.cost @ x)
    gap = abs(primal_obj - dual_obj) if np.isfinite(dual_obj) else np.inf

    reason = ""
    if primal_res > tol.feasibility:
        reason = f"primal residual {primal_res:.3e}"
    elif not gap <= tol.duality * (1.0 + abs(primal_obj)):
        reason = f"duality gap {gap:.3e}"
    elif comp > tol.complementarity:
        reason = f"complementary slackness violation {comp:.3e}"
    return Certificate(primal_res, dual_obj, gap, comp, ok=not reason, reason=reason)
