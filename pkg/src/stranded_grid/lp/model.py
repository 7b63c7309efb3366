"""Linear and mixed-integer program containers.

Programs are assembled with :class:`LpBuilder` and frozen into an immutable
:class:`LinearProgram` holding the constraint matrix in coordinate form::

    minimize    c'x
    subject to  row_lo <= A x <= row_hi
                lb <= x <= ub
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

INF = float("inf")


@dataclass(frozen=True)
class Tolerances:
    feasibility: float = 1e-8
    duality: float = 1e-6
    complementarity: float = 1e-6
    integrality: float = 1e-6
    mip_gap: float = 1e-6


TOLERANCES = Tolerances()


class LpStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


class LpError(Exception):
    """Base class for solver failures."""


class NumericalError(LpError):
    """The solver gave up for numerical reasons (not a model property)."""


class MipError(LpError):
    pass


class LinearProgram:
    """Immutable LP. Arrays are read-only views; use the ``with_*`` helpers
    to derive modified copies."""

    def __init__(self, var_names, lb, ub, cost, row_names, row_lo, row_hi,
                 a_rows, a_cols, a_vals, name="lp"):
        self.name = name
        self.var_names = tuple(var_names)
        self.row_names = tuple(row_names)
        self.lb = _ro(lb)
        self.ub = _ro(ub)
        self.cost = _ro(cost)
        self.row_lo = _ro(row_lo)
        self.row_hi = _ro(row_hi)
        self.a_rows = _ro(a_rows, np.int64)
        self.a_cols = _ro(a_cols, np.int64)
        self.a_vals = _ro(a_vals)
        self._check()

    @property
    def num_vars(self) -> int:
        return len(self.var_names)

    @property
    def num_rows(self) -> int:
        return len(self.row_names)

    def _check(self):
        n, m = self.num_vars, self.num_rows
        for arr, size, label in ((self.lb, n, "lb"), (self.ub, n, "ub"), (self.cost, n, "cost"),
                                 (self.row_lo, m, "row_lo"), (self.row_hi, m, "row_hi")):
            if arr.shape != (size,):
                raise ValueError(f"{label} has shape {arr.shape}, expected ({size},)")
        if not (len(self.a_rows) == len(self.a_cols) == len(self.a_vals)):
            raise ValueError("coefficient arrays differ in length")
        if np.any(self.lb > self.ub):
            j = int(np.argmax(self.lb > self.ub))
            raise ValueError(f"variable {self.var_names[j]!r} has lb > ub")
        if np.any(self.row_lo > self.row_hi):
            i = int(np.argmax(self.row_lo > self.row_hi))
            raise ValueError(f"row {self.row_names[i]!r} has lo > hi")
        if not np.all(np.isfinite(self.cost)):
            raise ValueError("objective coefficients must be finite")
        if not np.all(np.isfinite(self.a_vals)):
            raise ValueError("constraint coefficients must be finite")
        if len(self.a_rows):
            if self.a_rows.min() < 0 or self.a_rows.max() >= m:
                raise ValueError("coefficient references a missing row")
            if self.a_cols.min() < 0 or self.a_cols.max() >= n:
                raise ValueError("coefficient references a missing variable")

    def dense(self) -> np.ndarray:
        A = np.zeros((self.num_rows, self.num_vars))
        np.add.at(A, (self.a_rows, self.a_cols), self.a_vals)
        return A

    def sparse(self):
        from scipy import sparse

        return sparse.csr_matrix((self.a_vals, (self.a_rows, self.a_cols)),
                                 shape=(self.num_rows, self.num_vars))

    def activity(self, x) -> np.ndarray:
        act = np.zeros(self.num_rows)
        np.add.at(act, self.a_rows, self.a_vals * np.asarray(x)[self.a_cols])
        return act

    def transpose_product(self, y) -> np.ndarray:
        """A' y."""
        out = np.zeros(self.num_vars)
        np.add.at(out, self.a_cols, self.a_vals * np.asarray(y)[self.a_rows])
        return out

    def objective(self, x) -> float:
        return float(self.cost @ np.asarray(x))

    def _replace(self, **kw) -> "LinearProgram":
        args = dict(var_names=self.var_names, lb=self.lb, ub=self.ub, cost=self.cost,
                    row_names=self.row_names, row_lo=self.row_lo, row_hi=self.row_hi,
                    a_rows=self.a_rows, a_cols=self.a_cols, a_vals=self.a_vals, name=self.name)
        args.update(kw)
        return LinearProgram(**args)

    def with_bounds(self, idx, lb=None, ub=None) -> "LinearProgram":
        new_lb, new_ub = self.lb.copy(), self.ub.copy()
        if lb is not None:
            new_lb[idx] = lb
        if ub is not None:
            new_ub[idx] = ub
        return self._replace(lb=new_lb, ub=new_ub)

    def with_row_bounds(self, idx, lo=None, hi=None) -> "LinearProgram":
        new_lo, new_hi = self.row_lo.copy(), self.row_hi.copy()
        if lo is not None:
            new_lo[idx] = lo
        if hi is not None:
            new_hi[idx] = hi
        return self._replace(row_lo=new_lo, row_hi=new_hi)

    def with_rows(self, names, coeffs: Sequence[dict], lo, hi) -> "LinearProgram":
        """Append rows; ``coeffs`` holds one {var index: value} map per row."""
        m = self.num_rows
        rows, cols, vals = [self.a_rows], [self.a_cols], [self.a_vals]
        for k, row in enumerate(coeffs):
            idx = np.fromiter(row.keys(), dtype=np.int64, count=len(row))
            rows.append(np.full(len(row), m + k, dtype=np.int64))
            cols.append(idx)
            vals.append(np.fromiter(row.values(), dtype=float, count=len(row)))
        return self._replace(
            row_names=self.row_names + tuple(names),
            row_lo=np.concatenate([self.row_lo, np.asarray(lo, dtype=float)]),
            row_hi=np.concatenate([self.row_hi, np.asarray(hi, dtype=float)]),
            a_rows=np.concatenate(rows), a_cols=np.concatenate(cols), a_vals=np.concatenate(vals),
        )

    def __repr__(self):
        return f"LinearProgram({self.name!r}, vars={self.num_vars}, rows={self.num_rows}, nnz={len(self.a_vals)})"


def _ro(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


class LpBuilder:
    """Incremental LP assembly. Variable and row names must be unique."""

    def __init__(self, name="lp"):
        self.name = name
        self._vars: dict[str, int] = {}
        self._lb: list[float] = []
        self._ub: list[float] = []
        self._cost: list[float] = []
        self._rows: dict[str, int] = {}
        self._lo: list[float] = []
        self._hi: list[float] = []
        self._ai: list[int] = []
        self._aj: list[int] = []
        self._av: list[float] = []

    def add_var(self, name: str, lb=0.0, ub=INF, cost=0.0) -> int:
        if name in self._vars:
            raise ValueError(f"duplicate variable {name!r}")
        j = len(self._lb)
        self._vars[name] = j
        self._lb.append(float(lb))
        self._ub.append(float(ub))
        self._cost.append(float(cost))
        return j

    def add_row(self, name: str, coeffs: dict[int, float], lo=-INF, hi=INF) -> int:
        if name in self._rows:
            raise ValueError(f"duplicate row {name!r}")
        i = len(self._lo)
        self._rows[name] = i
        self._lo.append(float(lo))
        self._hi.append(float(hi))
        for j, v in coeffs.items():
            if j < 0 or j >= len(self._lb):
                raise ValueError(f"row {name!r} references unknown variable index {j}")
            if v != 0.0:
                self._ai.append(i)
                self._aj.append(j)
                self._av.append(float(v))
        return i

    def var(self, name: str) -> int:
        return self._vars[name]

    @property
    def num_vars(self) -> int:
        return len(self._lb)

    def build(self) -> LinearProgram:
        return LinearProgram(list(self._vars), self._lb, self._ub, self._cost,
                             list(self._rows), self._lo, self._hi,
                             self._ai, self._aj, self._av, name=self.name)


@dataclass
class LpSolution:
    status: LpStatus
    objective: float = float("nan")
    primal: np.ndarray = field(default_factory=lambda: np.zeros(0))
    duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    reduced_costs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0
    backend: str = ""
    # unbounded ray, or Farkas multipliers on rows for infeasibility
    certificate: np.ndarray | None = None

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


@dataclass(frozen=True)
class MixedIntegerProgram:
    lp: LinearProgram
    integer: tuple[int, ...]

    def __post_init__(self):
        for j in self.integer:
            if not (np.isfinite(self.lp.lb[j]) and np.isfinite(self.lp.ub[j])):
                raise ValueError(f"integer variable {self.lp.var_names[j]!r} must be bounded")


@dataclass
class MipSolution:
    status: LpStatus
    objective: float
    primal: np.ndarray
    gap: float
    nodes: int
    budget_exhausted: bool = False
    best_bound: float = float("nan")
