"""The four experimental configurations and the wind-level sweep.

Case 1 is the base system. Case 2 adds data centers as constant loads at
given buses, Case 3 adds a collocated wind farm to each of those, and
Case 4 lets the placement model choose where ``dc_count`` dispatchable
loads of ``dc_size`` MW go.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .dispatch import DispatchError, DispatchInputs, DispatchSolution, build_ed, solve_built
from .lp import LpError
from .metrics import (AchievedCapacity, EnsembleStats, MetricReport, achieved_capacity, check_identities,
                      ensemble_stats, metric_report)
from .network import FixedLoad, Network, NetworkError, WindFarm
from .parallel import parallel_map
from .placement import PlacementConfig, PlacementError, PlacementSolution, solve_placement
from .scenario import DayType, ScenarioError, ScenarioSet, scale_to_penetration

DEFAULT_VOLL = 1000.0


@dataclass(frozen=True)
class CaseSpec:
    case_id: int
    dc_count: int = 0
    dc_size: float = 0.0
    dc_buses: tuple[str, ...] = ()
    capacity_factor: float = 0.3
    voll: float = DEFAULT_VOLL

    def __post_init__(self):
        if self.case_id not in (1, 2, 3, 4):
            raise ValueError(f"case_id must be 1..4, got {self.case_id}")
        if self.dc_count < 0 or self.dc_count != int(self.dc_count):
            raise ValueError("dc_count must be a nonnegative integer")
        if self.dc_size < 0:
            raise ValueError("dc_size must be nonnegative")
        if not 0 < self.capacity_factor <= 1:
            raise ValueError("capacity_factor must lie in (0, 1]")
        if self.case_id in (2, 3) and len(self.dc_buses) != self.dc_count:
            raise ValueError(f"case {self.case_id} needs one bus per data center "
                             f"({self.dc_count}), got {len(self.dc_buses)}")

    @classmethod
    def from_dict(cls, doc: Mapping) -> "CaseSpec":
        return cls(case_id=int(doc["case_id"]), dc_count=int(doc.get("dc_count", 0)),
                   dc_size=float(doc.get("dc_size", 0.0)), dc_buses=tuple(doc.get("dc_buses", ())),
                   capacity_factor=float(doc.get("capacity_factor", 0.3)),
                   voll=float(doc.get("voll", DEFAULT_VOLL)))


def random_dc_buses(net: Network, count: int, seed: int = 0, replace_: bool = False) -> tuple[str, ...]:
    """Reproducible arbitrary choice of data-center buses."""
    rng = np.random.default_rng(seed)
    ids = [b.id for b in net.buses]
    picks = rng.choice(len(ids), size=count, replace=replace_ or count > len(ids))
    return tuple(ids[k] for k in picks)


@dataclass(frozen=True)
class CaseSetup:
    net: Network
    scenarios: ScenarioSet | None
    placement: PlacementConfig | None = None
    penetration_farms: tuple[str, ...] = ()
    collocated: tuple[str, ...] = ()
    nameplate: Mapping[str, float] = field(default_factory=dict)


def _hops(net: Network, start: str) -> dict[str, int]:
    adj: dict[str, list[str]] = {b.id: [] for b in net.buses}
    for ln in net.lines:
        adj[ln.from_bus].append(ln.to_bus)
        adj[ln.to_bus].append(ln.from_bus)
    dist = {start: 0}
    queue = deque([start])
    while queue:
        a = queue.popleft()
        for b in adj[a]:
            if b not in dist:
                dist[b] = dist[a] + 1
                queue.append(b)
    return dist


def nearest_farm(net: Network, bus: str) -> WindFarm:
    dist = _hops(net, bus)
    reachable = [w for w in net.wind_farms if w.bus in dist]
    if not reachable:
        raise NetworkError(f"no wind farm reachable from bus {bus!r}")
    return min(reachable, key=lambda w: (dist[w.bus], w.id))


def apply_case(base: Network, spec: CaseSpec, scenarios: ScenarioSet | None = None,
               shape: ScenarioSet | None = None) -> CaseSetup:
    """Network (and placement config for Case 4) for one case.

    ``scenarios`` is the wind set used for dispatch; Case 3 extends it with
    the collocated farms, whose trajectories copy the shape of the nearest
    existing farm in ``shape`` (default ``scenarios``) rescaled so that
    their expected output is ``dc_size`` MW.
    """
    base_farms = tuple(w.id for w in base.wind_farms)
    missing = [b for b in spec.dc_buses if b not in base.bus_index]
    if missing:
        raise NetworkError(f"data-center buses not in network: {missing}")
    if spec.case_id == 1:
        return CaseSetup(base, scenarios, None, base_farms)
    if spec.case_id == 4:
        cfg = PlacementConfig(K=spec.dc_count, U=spec.dc_size, candidates=spec.dc_buses or None)
        return CaseSetup(base, scenarios, cfg, base_farms)

    T = base.horizon
    loads = tuple(FixedLoad(f"dc{k}", bus, (float(spec.dc_size),) * T, spec.voll)
                  for k, bus in enumerate(spec.dc_buses))
    net = replace(base, loads=base.loads + loads, name=f"{base.name}+case{spec.case_id}")
    if spec.case_id == 2:
        return CaseSetup(net, scenarios, None, base_farms)

    shape = scenarios if shape is None else shape
    if shape is None:
        raise ScenarioError("case 3 needs a scenario set to clone collocated wind shapes from")
    farms, extra, nameplate = [], {}, {}
    probs = shape.probabilities
    for k, bus in enumerate(spec.dc_buses):
        src = nearest_farm(base, bus)
        cube = np.array([s.trajectories[src.id] for s in shape.scenarios], dtype=float)
        mean = float(probs @ cube.mean(axis=1))
        if mean <= 0:
            raise ScenarioError(f"farm {src.id} has no expected output to clone for bus {bus}")
        fid = f"dcw{k}"
        farms.append(WindFarm(fid, bus, src.spill_cost))
        extra[fid] = cube * (spec.dc_size / mean)
        nameplate[fid] = spec.dc_size / spec.capacity_factor
    net = replace(net, wind_farms=net.wind_farms + tuple(farms))
    sset = scenarios.with_farms(extra) if scenarios is not None else None
    return CaseSetup(net, sset, None, base_farms, tuple(extra), nameplate)


# ------------------------------------------------------------ experiment

@dataclass
class Cell:
    case_id: int
    day_type: str
    wind_level: float
    reports: list[MetricReport] = field(default_factory=list)
    scenario_ids: list[str] = field(default_factory=list)
    probabilities: np.ndarray | None = None
    stats: EnsembleStats | None = None
    placement: PlacementSolution | None = None
    achieved: AchievedCapacity | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def key(self):
        return (self.case_id, self.day_type, self.wind_level)


@dataclass
class ExperimentReport:
    cells: list[Cell]

    @property
    def failures(self) -> list[Cell]:
        return [c for c in self.cells if not c.ok]

    def cell(self, case_id: int, day_type: str, wind_level: float) -> Cell:
        for c in self.cells:
            if c.key == (case_id, day_type, wind_level):
                return c
        raise KeyError((case_id, day_type, wind_level))


def season_of(day_type: str) -> str:
    return DayType.parse(day_type).season


def dispatch_ensemble(net: Network, sset: ScenarioSet, placement=None, capacity: float = 0.0,
                      threads: int | None = None, backend: str | None = None) -> list[DispatchSolution]:
    """One dispatch per scenario, in scenario order. A zero placement is
    dropped so the LP is identical to the plain dispatch."""
    if placement is not None and not np.any(np.asarray(placement) > 0):
        placement = None

    def run(s):
        inputs = DispatchInputs.make(net, s, placement=placement, capacity=capacity)
        lp, idx = build_ed(inputs)
        return solve_built(inputs, lp, idx, backend=backend)

    return parallel_map(run, sset.scenarios, threads)


def run_cell(base: Network, spec: CaseSpec, day_type: str, level: float, raw: ScenarioSet,
             method: str = "benders", placement_options: Mapping | None = None,
             threads: int | None = None, backend: str | None = None) -> Cell:
    cell = Cell(spec.case_id, day_type, level)
    try:
        day_net = base.for_day(day_type)
        scaled = scale_to_penetration(raw, day_net, level)
        setup = apply_case(day_net, spec, scaled, shape=raw)
        placement = None
        if setup.placement is not None:
            cfg = replace(setup.placement, backend=backend, **dict(placement_options or {}))
            cell.placement = solve_placement(setup.net, setup.scenarios, cfg, method=method, threads=threads)
            placement = cell.placement.x
            if cell.placement.budget_exhausted:
                cell.error = "placement budget exhausted"
        sols = dispatch_ensemble(setup.net, setup.scenarios, placement, spec.dc_size, threads, backend)
        cell.reports = [metric_report(s, setup.penetration_farms) for s in sols]
        cell.scenario_ids = setup.scenarios.ids
        cell.probabilities = setup.scenarios.probabilities
        cell.stats = ensemble_stats(cell.reports, cell.probabilities)
        if spec.case_id == 4 and spec.dc_count > 0:
            cell.achieved = achieved_capacity(sols, spec.dc_count, cell.probabilities, spec.dc_size)
        for sid, rep in zip(cell.scenario_ids, cell.reports):
            bad = check_identities(rep)
            if bad:
                raise ValueError(f"scenario {sid}: metric identities violated: {', '.join(bad)}")
    except (DispatchError, LpError, PlacementError, NetworkError, ScenarioError, ValueError) as exc:
        cell.error = f"{type(exc).__name__}: {exc}"
    return cell


def run_experiment(base: Network, specs: Sequence[CaseSpec], scenario_sets: Mapping[str, ScenarioSet],
                   wind_levels: Sequence[float], day_types: Sequence[str], method: str = "benders",
                   placement_options: Mapping | None = None, threads: int | None = None,
                   backend: str | None = None) -> ExperimentReport:
    """Run every (case, day type, wind level) cell. ``scenario_sets`` maps
    a season (or a day type) to its unscaled wind set; cells run in order
    and each one parallelizes over scenarios."""
    cells = []
    for spec in sorted(specs, key=lambda s: s.case_id):
        for day in day_types:
            raw = scenario_sets.get(day) or scenario_sets.get(season_of(day))
            for level in wind_levels:
                if raw is None:
                    cell = Cell(spec.case_id, day, float(level), error=f"no scenario set for {day}")
                else:
                    cell = run_cell(base, spec, day, float(level), raw, method, placement_options, threads,
                                    backend)
                cells.append(cell)
    return ExperimentReport(cells)


def mean_report(cell: Cell) -> dict[str, float]:
    if cell.stats is None:
        return {name: math.nan for name in MetricReport.field_names()}
    return dict(cell.stats.means)
