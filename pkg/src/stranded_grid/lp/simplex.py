"""Reference LP solver: bounded-variable revised simplex.

Rows are turned into equalities with bounded logical variables
(``A x - s = 0``, ``row_lo <= s <= row_hi``). Phase 1 minimizes a sum of
artificial variables placed on rows the starting point violates; phase 2
optimizes the true objective. Pricing is Dantzig's rule with a switch to
Bland's rule after a run of degenerate pivots, and the ratio test is a
two-pass Harris test. The basis inverse is kept explicitly with product-form
updates and periodic refactorization, which is fine for the problem sizes
this package produces but not meant for large sparse models.
"""

from __future__ import annotations

import numpy as np

from .model import LinearProgram, LpSolution, LpStatus, NumericalError

BASIC, AT_LOWER, AT_UPPER, FREE = 0, 1, 2, 3

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-9
DEGENERATE_RUN = 50
REFACTOR_EVERY = 64


class RevisedSimplex:
    """Single-use solver instance; holds mutable working state."""

    def __init__(self, lp: LinearProgram, max_iter: int | None = None):
        self.lp = lp
        self.A = lp.dense()
        m, n = self.A.shape
        self.m, self.n = m, n
        self.max_iter = max_iter or 50 * (m + n) + 1000
        self.iterations = 0

        self.lo = np.concatenate([lp.lb, lp.row_lo, np.zeros(m)])
        self.hi = np.concatenate([lp.ub, lp.row_hi, np.full(m, np.inf)])
        self.sigma = np.ones(m)
        self.x = np.zeros(n + 2 * m)
        self.state = np.full(n + 2 * m, AT_LOWER, dtype=np.int8)
        scale = np.abs(lp.cost).max(initial=0.0)
        self.dual_tol = 1e-9 * max(1.0, scale)

    # columns of [A, -I, diag(sigma)]
    def _column(self, j: int) -> np.ndarray:
        n, m = self.n, self.m
        if j < n:
            return self.A[:, j]
        col = np.zeros(m)
        if j < n + m:
            col[j - n] = -1.0
        else:
            col[j - n - m] = self.sigma[j - n - m]
        return col

    def _basis_matrix(self) -> np.ndarray:
        return np.column_stack([self._column(j) for j in self.basis]) if self.m else np.zeros((0, 0))

    def _refactor(self):
        B = self._basis_matrix()
        try:
            self.Binv = np.linalg.inv(B) if self.m else np.zeros((0, 0))
        except np.linalg.LinAlgError as exc:
            raise NumericalError("singular basis during refactorization") from exc
        # x_B = -B^{-1} N x_N
        xn = self.x.copy()
        xn[self.basis] = 0.0
        n, m = self.n, self.m
        rhs = -(self.A @ xn[:n] - xn[n:n + m] + self.sigma * xn[n + m:])
        self.x[self.basis] = self.Binv @ rhs

    def _start(self):
        n, m = self.n, self.m
        lo, hi = self.lo, self.hi
        for j in range(n):
            if np.isfinite(lo[j]):
                self.x[j], self.state[j] = lo[j], AT_LOWER
            elif np.isfinite(hi[j]):
                self.x[j], self.state[j] = hi[j], AT_UPPER
            else:
                self.x[j], self.state[j] = 0.0, FREE
        r = self.A @ self.x[:n]
        basis = []
        self.artificial = np.zeros(m, dtype=bool)
        for i in range(m):
            s, a = n + i, n + m + i
            if lo[s] - FEAS_TOL <= r[i] <= hi[s] + FEAS_TOL:
                self.x[s], self.state[s] = r[i], BASIC
                basis.append(s)
                self.hi[a] = 0.0
            else:
                v = lo[s] if r[i] < lo[s] else hi[s]
                self.x[s] = v
                self.state[s] = AT_LOWER if r[i] < lo[s] else AT_UPPER
                self.sigma[i] = 1.0 if v > r[i] else -1.0
                self.x[a], self.state[a] = abs(v - r[i]), BASIC
                self.artificial[i] = True
                basis.append(a)
        self.basis = np.array(basis, dtype=np.int64)
        self._refactor()

    def _reduced_costs(self, cost: np.ndarray, y: np.ndarray) -> np.ndarray:
        n, m = self.n, self.m
        d = np.empty(n + 2 * m)
        d[:n] = cost[:n] - self.A.T @ y
        d[n:n + m] = cost[n:n + m] + y
        d[n + m:] = cost[n + m:] - self.sigma * y
        return d

    def _run(self, cost: np.ndarray, phase: int) -> LpStatus:
        lo, hi, x, state = self.lo, self.hi, self.x, self.state
        degenerate = 0
        bland = False
        since_refactor = 0
        while True:
            if self.iterations >= self.max_iter:
                raise NumericalError(f"iteration limit {self.max_iter} reached")
            if since_refactor >= REFACTOR_EVERY:
                self._refactor()
                since_refactor = 0
            y = cost[self.basis] @ self.Binv if self.m else np.zeros(0)
            d = self._reduced_costs(cost, y)

            movable = (state != BASIC) & (lo < hi)
            inc = movable & (((state == AT_LOWER) | (state == FREE)) & (d < -self.dual_tol))
            dec = movable & (((state == AT_UPPER) | (state == FREE)) & (d > self.dual_tol))
            eligible = inc | dec
            if not eligible.any():
                return LpStatus.OPTIMAL
            if bland:
                q = int(np.flatnonzero(eligible)[0])
            else:
                score = np.where(eligible, np.abs(d), -1.0)
                q = int(np.argmax(score))
            direction = 1.0 if inc[q] else -1.0

            alpha = self.Binv @ self._column(q) if self.m else np.zeros(0)
            rate = direction * alpha
            xb = x[self.basis]
            lb_b, ub_b = lo[self.basis], hi[self.basis]

            # Harris pass 1: largest step with bounds relaxed by the tolerance
            with np.errstate(divide="ignore", invalid="ignore"):
                down = rate > PIVOT_TOL
                up = rate < -PIVOT_TOL
                relaxed = np.full(self.m, np.inf)
                relaxed[down] = (xb[down] - lb_b[down] + FEAS_TOL) / rate[down]
                relaxed[up] = (ub_b[up] - xb[up] + FEAS_TOL) / -rate[up]
                exact = np.full(self.m, np.inf)
                exact[down] = np.maximum(xb[down] - lb_b[down], 0.0) / rate[down]
                exact[up] = np.maximum(ub_b[up] - xb[up], 0.0) / -rate[up]
            t_max = relaxed.min(initial=np.inf)
            flip = hi[q] - lo[q]

            leave = -1
            if np.isfinite(t_max):
                cand = np.flatnonzero(exact <= t_max)
                if bland:
                    leave = int(cand[np.argmin(self.basis[cand])])
                else:
                    leave = int(cand[np.argmax(np.abs(alpha[cand]))])
                step = exact[leave]
            else:
                step = np.inf

            if np.isfinite(flip) and flip <= step:
                step = flip
                leave = -1
            elif not np.isfinite(step):
                if phase == 1:
                    raise NumericalError("unbounded phase-1 direction")
                self.ray = self._ray(q, direction, alpha)
                return LpStatus.UNBOUNDED

            self.iterations += 1
            since_refactor += 1
            if step <= 1e-12:
                degenerate += 1
                if degenerate > DEGENERATE_RUN:
                    bland = True
            else:
                degenerate = 0
                bland = False

            x[q] += direction * step
            x[self.basis] = xb - direction * step * alpha
            if leave < 0:
                state[q] = AT_UPPER if direction > 0 else AT_LOWER
                x[q] = hi[q] if direction > 0 else lo[q]
                continue

            out = int(self.basis[leave])
            if rate[leave] > 0:
                x[out], state[out] = lo[out], AT_LOWER
            else:
                x[out], state[out] = hi[out], AT_UPPER
            self.basis[leave] = q
            state[q] = BASIC

            piv = alpha[leave]
            if abs(piv) < 1e-11:
                raise NumericalError("pivot element too small")
            row = self.Binv[leave] / piv
            self.Binv -= np.outer(alpha, row)
            self.Binv[leave] = row

    def _ray(self, q, direction, alpha):
        ray = np.zeros(self.n + 2 * self.m)
        ray[q] = direction
        ray[self.basis] = -direction * alpha
        return ray[: self.n]

    def solve(self) -> LpSolution:
        n, m = self.n, self.m
        self._start()
        if self.artificial.any():
            phase1 = np.zeros(n + 2 * m)
            phase1[n + m:][self.artificial] = 1.0
            self._run(phase1, phase=1)
            self._refactor()
            infeas = float(self.x[n + m:].sum())
            bounds = np.concatenate([self.lp.row_lo, self.lp.row_hi, self.lp.lb, self.lp.ub])
            scale = 1.0 + np.abs(bounds[np.isfinite(bounds)]).max(initial=0.0)
            if infeas > 1e-7 * scale:
                y = phase1[self.basis] @ self.Binv
                return LpSolution(LpStatus.INFEASIBLE, iterations=self.iterations,
                                  backend="simplex", certificate=y)
        # artificials are pinned at zero from here on
        self.hi[n + m:] = 0.0
        self.x[n + m:][self.state[n + m:] != BASIC] = 0.0
        self.state[n + m:][self.state[n + m:] != BASIC] = AT_LOWER

        cost = np.concatenate([self.lp.cost, np.zeros(2 * m)])
        status = self._run(cost, phase=2)
        if status is LpStatus.UNBOUNDED:
            return LpSolution(status, objective=-np.inf, iterations=self.iterations,
                              backend="simplex", certificate=self.ray)
        self._refactor()
        y = cost[self.basis] @ self.Binv if m else np.zeros(0)
        x = self.x[:n].copy()
        rc = self.lp.cost - self.A.T @ y
        return LpSolution(LpStatus.OPTIMAL, objective=float(self.lp.cost @ x), primal=x,
                          duals=y, reduced_costs=rc, iterations=self.iterations,
                          backend="simplex")


def solve_simplex(lp: LinearProgram, max_iter: int | None = None) -> LpSolution:
    return RevisedSimplex(lp, max_iter=max_iter).solve()
