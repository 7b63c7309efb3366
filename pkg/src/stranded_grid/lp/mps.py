"""Free-format MPS export for cross-checking against external solvers.

Row senses: ``lo == hi`` is E, a single finite side is L or G, two finite
sides are a G row with a RANGES entry, and a free row is N. Numbers use
``repr`` so the text is exact and reproducible. Whitespace in names is
replaced by ``_`` because free MPS splits on it.
"""

from __future__ import annotations

import math
import re

import numpy as np

from .model import LinearProgram, MixedIntegerProgram

OBJ = "obj"


def _name(s: str) -> str:
    return re.sub(r"\s+", "_", s) or "_"


def _num(v: float) -> str:
    return repr(float(v) + 0.0)


def to_mps(problem: LinearProgram | MixedIntegerProgram) -> str:
    if isinstance(problem, MixedIntegerProgram):
        lp, integer = problem.lp, set(problem.integer)
    else:
        lp, integer = problem, set()
    rows = [_name(r) for r in lp.row_names]
    cols = [_name(v) for v in lp.var_names]
    out = [f"NAME {_name(lp.name)}", "ROWS", f" N  {OBJ}"]
    rhs, ranges = {}, {}
    for i, name in enumerate(rows):
        lo, hi = lp.row_lo[i], lp.row_hi[i]
        if lo == hi:
            kind, rhs[i] = "E", lo
        elif math.isinf(lo) and math.isinf(hi):
            kind = "N"
        elif math.isinf(lo):
            kind, rhs[i] = "L", hi
        elif math.isinf(hi):
            kind, rhs[i] = "G", lo
        else:
            kind, rhs[i], ranges[i] = "G", lo, hi - lo
        out.append(f" {kind}  {name}")

    out.append("COLUMNS")
    order = np.lexsort((lp.a_rows, lp.a_cols))
    a_rows, a_vals = lp.a_rows[order], lp.a_vals[order]
    bounds = np.searchsorted(lp.a_cols[order], np.arange(len(cols) + 1))
    marker_open = False
    for j, col in enumerate(cols):
        is_int = j in integer
        if is_int and not marker_open:
            out.append("    MARKER  'MARKER'  'INTORG'")
            marker_open = True
        elif not is_int and marker_open:
            out.append("    MARKER  'MARKER'  'INTEND'")
            marker_open = False
        entries = []
        if lp.cost[j] != 0:
            entries.append((OBJ, lp.cost[j]))
        for k in range(bounds[j], bounds[j + 1]):
            if a_vals[k] != 0:
                entries.append((rows[a_rows[k]], a_vals[k]))
        if not entries:
            entries.append((OBJ, 0.0))  # keep the column declared
        for row, v in entries:
            out.append(f"    {col}  {row}  {_num(v)}")
    if marker_open:
        out.append("    MARKER  'MARKER'  'INTEND'")

    out.append("RHS")
    for i in sorted(rhs):
        if rhs[i] != 0:
            out.append(f"    RHS  {rows[i]}  {_num(rhs[i])}")
    if ranges:
        out.append("RANGES")
        for i in sorted(ranges):
            out.append(f"    RNG  {rows[i]}  {_num(ranges[i])}")

    out.append("BOUNDS")
    for j, col in enumerate(cols):
        lo, hi = lp.lb[j], lp.ub[j]
        if lo == hi:
            out.append(f" FX BND  {col}  {_num(lo)}")
        elif math.isinf(lo) and math.isinf(hi):
            out.append(f" FR BND  {col}")
        else:
            if math.isinf(lo):
                out.append(f" MI BND  {col}")
            elif lo != 0 or hi < 0:
                out.append(f" LO BND  {col}  {_num(lo)}")
            if not math.isinf(hi):
                out.append(f" UP BND  {col}  {_num(hi)}")
            elif j in integer:
                out.append(f" PL BND  {col}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def write_mps(problem, path) -> None:
    with open(path, "w") as fh:
        fh.write(to_mps(problem))
