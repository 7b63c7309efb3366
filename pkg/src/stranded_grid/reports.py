"""CSV emission and the per-directory run manifest.

Floats are written with ``repr`` so reruns are byte-identical and values
round-trip exactly.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .cases import Cell, ExperimentReport
from .dispatch import DispatchSolution
from .metrics import MetricReport
from .placement import PlacementSolution

MANIFEST = "manifest.json"
CONVERGENCE_HEADER = ("iteration", "lb", "ub", "gap", "seconds", "cuts_added")
SUMMARY_HEADER = ("case", "day_type", "wind_level", "rps", "thermal", "spill_wind", "spill_import",
                  "spill_renewable", "stranded", "absorbed_pos_lmp", "absorbed_nonpos_lmp", "dispatched_total",
                  "load_shed", "wind_penetration", "mean_cost", "std_cost", "achieved_capacity_count",
                  "achieved_capacity_energy", "scenarios", "status")


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return ""
        return repr(v + 0.0)  # folds -0.0
    return "" if v is None else str(v)


def to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path: Path, header, rows) -> Path:
    path.write_text(to_csv(header, rows))
    return path


# ---------------------------------------------------------------- dispatch

_SYMBOLS = (("p", "generators"), ("d", "loads"), ("f", "lines"), ("theta", "buses"), ("m", "imports"),
            ("w", "wind_farms"), ("r", "renewables"), ("u", "buses"))


def dispatch_rows(sol: DispatchSolution):
    net = sol.net
    for sym, attr in _SYMBOLS:
        values = getattr(sol, sym)
        for k, item in enumerate(getattr(net, attr)):
            for t in range(net.horizon):
                yield (sym, item.id, t, values[k, t])


def lmp_rows(sol: DispatchSolution):
    for n, bus in enumerate(sol.net.buses):
        for t in range(sol.net.horizon):
            yield (bus.id, t, sol.lmp[n, t])


def metric_rows(prefix: Sequence, scenario_ids, probabilities, reports: Sequence[MetricReport]):
    for sid, p, rep in zip(scenario_ids, probabilities, reports):
        yield (*prefix, sid, p, *(getattr(rep, f) for f in MetricReport.field_names()))


def metrics_header(prefix: Sequence[str]) -> tuple[str, ...]:
    return (*prefix, "scenario", "probability", *MetricReport.field_names())


def convergence_rows(sol: PlacementSolution, timings: bool = True, prefix: Sequence = ()):
    for rec in sol.log:
        yield (*prefix, rec.iteration, rec.lb, rec.ub, rec.gap, rec.seconds if timings else None, rec.cuts_added)


def placement_rows(sol: PlacementSolution, prefix: Sequence = ()):
    for bus, x in zip(sol.buses, sol.x):
        yield (*prefix, bus, int(x))


# -------------------------------------------------------------- experiment

def summary_row(cell: Cell):
    m = cell.stats.means if cell.stats else {}
    ach = cell.achieved
    return (cell.case_id, cell.day_type, cell.wind_level, m.get("rps"), m.get("thermal"), m.get("spill_wind"),
            m.get("spill_import"), m.get("spill_renewable"), m.get("stranded"), m.get("absorbed_pos_lmp"),
            m.get("absorbed_nonpos_lmp"), m.get("dispatched_total"), m.get("load_shed"),
            m.get("wind_penetration"), cell.stats.mean_cost if cell.stats else None,
            cell.stats.std_cost if cell.stats else None, ach.count_mean if ach else None,
            ach.energy_mean if ach else None, len(cell.reports), "ok" if cell.ok else cell.error)


def write_experiment(report: ExperimentReport, out: Path, timings: bool = False) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    cell_cols = ("case", "day_type", "wind_level")
    metrics = []
    for c in report.cells:
        if c.reports:
            metrics.extend(metric_rows(c.key, c.scenario_ids, c.probabilities, c.reports))
    placed = [c for c in report.cells if c.placement is not None]
    return [
        write_csv(out / "metrics.csv", metrics_header(cell_cols), metrics),
        write_csv(out / "metrics_summary.csv", SUMMARY_HEADER, (summary_row(c) for c in report.cells)),
        write_csv(out / "placement.csv", (*cell_cols, "bus", "x"),
                  (r for c in placed for r in placement_rows(c.placement, c.key))),
        write_csv(out / "convergence.csv", (*cell_cols, *CONVERGENCE_HEADER),
                  (r for c in placed for r in convergence_rows(c.placement, timings, c.key))),
    ]


# ---------------------------------------------------------------- manifest

def digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def config_hash(config: Mapping) -> str:
    text = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode()).hexdigest()


def write_manifest(out: Path, command: str, config: Mapping, inputs: Sequence[Path], outputs: Sequence[Path],
                   status: str, started: datetime, details: Mapping | None = None) -> Path:
    from . import __version__

    doc = {
        "tool": "stranded-grid",
        "version": __version__,
        "command": command,
        "config_hash": config_hash(config),
        "config": dict(config),
        "inputs": {str(p): digest(p) for p in inputs},
        "outputs": {Path(p).name: digest(p) for p in outputs},
        "started": started.isoformat(),
        "finished": datetime.now(timezone.utc).isoformat(),
        "status": status,
    }
    if details:
        doc["details"] = dict(details)
    path = out / MANIFEST
    path.write_text(json.dumps(doc, indent=1, sort_keys=True, default=fmt) + "\n")
    return path
