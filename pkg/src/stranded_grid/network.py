"""Grid data model: buses, lines, thermal units, loads and supplies.

Networks are frozen dataclasses; time series are tuples of length
``horizon``. :func:`load_network` parses the JSON document format described
in ``docs/formats/network.schema.json`` and refuses invalid input, while
:func:`validate_network` reports problems as data.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import numpy as np


class NetworkError(ValueError):
    pass


Series = tuple  # tuple[float, ...], one value per period


@dataclass(frozen=True)
class Bus:
    id: str
    theta_min: float = -180.0
    theta_max: float = 180.0


@dataclass(frozen=True)
class Line:
    id: str
    from_bus: str
    to_bus: str
    susceptance: float
    flow_max: float


@dataclass(frozen=True)
class ThermalGenerator:
    id: str
    bus: str
    cost: float
    p_max: float
    ramp_up: float
    ramp_down: float
    p_initial: float = 0.0


@dataclass(frozen=True)
class FixedLoad:
    id: str
    bus: str
    demand: Series
    shed_cost: float


@dataclass(frozen=True)
class ImportPoint:
    id: str
    bus: str
    supply: Series
    spill_cost: float


@dataclass(frozen=True)
class RenewableUnit:
    id: str
    bus: str
    supply: Series
    spill_cost: float


@dataclass(frozen=True)
class WindFarm:
    id: str
    bus: str
    spill_cost: float
    # deterministic trajectory for single-scenario dispatch
    trajectory: Series | None = None


@dataclass(frozen=True)
class DayProfile:
    """Per-day-type replacement series keyed by component id."""

    loads: Mapping[str, Series] = field(default_factory=dict)
    imports: Mapping[str, Series] = field(default_factory=dict)
    renewables: Mapping[str, Series] = field(default_factory=dict)


@dataclass(frozen=True)
class Network:
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...] = ()
    generators: tuple[ThermalGenerator, ...] = ()
    loads: tuple[FixedLoad, ...] = ()
    imports: tuple[ImportPoint, ...] = ()
    renewables: tuple[RenewableUnit, ...] = ()
    wind_farms: tuple[WindFarm, ...] = ()
    horizon: int = 24
    period_hours: float = 1.0
    name: str = "network"
    day_profiles: Mapping[str, DayProfile] = field(default_factory=dict)
    # value of lost dispatchable load; accepted for completeness, unused by the model
    dc_lost_value: float = 0.0

    @cached_property
    def bus_index(self) -> dict[str, int]:
        return {b.id: k for k, b in enumerate(self.buses)}

    @property
    def day_types(self) -> list[str]:
        return list(self.day_profiles)

    def for_day(self, day: str | None) -> "Network":
        """Network with the series of day type ``day`` substituted in."""
        if day is None or day == "base":
            return self
        if day not in self.day_profiles:
            raise NetworkError(f"unknown day type {day!r}; available: {sorted(self.day_profiles)}")
        prof = self.day_profiles[day]
        return replace(
            self,
            loads=tuple(replace(x, demand=prof.loads.get(x.id, x.demand)) for x in self.loads),
            imports=tuple(replace(x, supply=prof.imports.get(x.id, x.supply)) for x in self.imports),
            renewables=tuple(replace(x, supply=prof.renewables.get(x.id, x.supply)) for x in self.renewables),
            day_profiles={},
            name=f"{self.name}/{day}",
        )

    def demand_matrix(self) -> np.ndarray:
        return np.array([x.demand for x in self.loads], dtype=float).reshape(len(self.loads), self.horizon)

    def total_demand(self) -> float:
        """Energy demanded over the horizon (MWh)."""
        return float(self.demand_matrix().sum() * self.period_hours)


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self):
        return bool(self.errors or self.warnings)

    def lines(self) -> list[str]:
        return [f"error: {e}" for e in self.errors] + [f"warning: {w}" for w in self.warnings]


def _check_series(report, label, series, horizon):
    if series is None:
        return
    if len(series) != horizon:
        report.errors.append(f"{label}: length {len(series)} != horizon {horizon}")
    if any(not math.isfinite(v) or v < 0 for v in series):
        report.errors.append(f"{label}: values must be finite and nonnegative")


def validate_network(net: Network) -> ValidationReport:
    r = ValidationReport()
    if net.horizon < 1:
        r.errors.append(f"horizon: must be >= 1 (got {net.horizon})")
    if not net.period_hours > 0:
        r.errors.append(f"period_hours: must be positive (got {net.period_hours})")

    bus_ids = [b.id for b in net.buses]
    seen = set()
    for b in net.buses:
        if b.id in seen:
            r.errors.append(f"buses: duplicate id {b.id!r}")
        seen.add(b.id)
        if not b.theta_min <= b.theta_max:
            r.errors.append(f"bus {b.id}: theta_min > theta_max")
    known = set(bus_ids)

    groups = (("lines", net.lines), ("generators", net.generators), ("loads", net.loads),
              ("imports", net.imports), ("renewables", net.renewables), ("wind_farms", net.wind_farms))
    for label, items in groups:
        ids = set()
        for item in items:
            if item.id in ids:
                r.errors.append(f"{label}: duplicate id {item.id!r}")
            ids.add(item.id)

    for ln in net.lines:
        for end in (ln.from_bus, ln.to_bus):
            if end not in known:
                r.errors.append(f"line {ln.id}: unknown bus {end!r}")
        if ln.from_bus == ln.to_bus:
            r.errors.append(f"line {ln.id}: from_bus == to_bus")
        if not ln.flow_max >= 0:
            r.errors.append(f"line {ln.id}: flow_max must be >= 0")
        if not math.isfinite(ln.susceptance) or ln.susceptance == 0:
            r.errors.append(f"line {ln.id}: susceptance must be finite and nonzero")

    for label, items in groups[1:]:
        for item in items:
            if item.bus not in known:
                r.errors.append(f"{label[:-1]} {item.id}: unknown bus {item.bus!r}")

    for g in net.generators:
        for attr in ("cost", "p_max", "ramp_up", "ramp_down"):
            if not getattr(g, attr) >= 0:
                r.errors.append(f"generator {g.id}: {attr} must be >= 0")
        if not 0 <= g.p_initial <= g.p_max:
            r.errors.append(f"generator {g.id}: p_initial must lie in [0, p_max]")
        elif g.p_initial > g.ramp_down:
            r.warnings.append(f"generator {g.id}: p_initial exceeds ramp_down; it cannot reach 0 in the first period")

    for x in net.loads:
        _check_series(r, f"load {x.id}: demand", x.demand, net.horizon)
        if not x.shed_cost >= 0:
            r.errors.append(f"load {x.id}: shed_cost must be >= 0")
    for label, items in (("import", net.imports), ("renewable", net.renewables)):
        for x in items:
            _check_series(r, f"{label} {x.id}: supply", x.supply, net.horizon)
            if not x.spill_cost >= 0:
                r.errors.append(f"{label} {x.id}: spill_cost must be >= 0")
    for w in net.wind_farms:
        _check_series(r, f"wind_farm {w.id}: trajectory", w.trajectory, net.horizon)
        if not w.spill_cost >= 0:
            r.errors.append(f"wind_farm {w.id}: spill_cost must be >= 0")

    for day, prof in net.day_profiles.items():
        for label, series_map, items in (("loads", prof.loads, net.loads),
                                         ("imports", prof.imports, net.imports),
                                         ("renewables", prof.renewables, net.renewables)):
            ids = {x.id for x in items}
            for cid, series in series_map.items():
                if cid not in ids:
                    r.errors.append(f"day_profiles.{day}.{label}: unknown id {cid!r}")
                _check_series(r, f"day_profiles.{day}.{label}.{cid}", series, net.horizon)

    if not r.errors:
        _check_connectivity(net, r)
    return r


def _check_connectivity(net: Network, report: ValidationReport):
    active = set()
    for items in (net.generators, net.loads, net.imports, net.renewables, net.wind_farms):
        active.update(x.bus for x in items)
    parent = {b.id: b.id for b in net.buses}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for ln in net.lines:
        parent[find(ln.from_bus)] = find(ln.to_bus)
    islands = {}
    for b in net.buses:
        if b.id in active:
            islands.setdefault(find(b.id), []).append(b.id)
    if len(islands) > 1:
        parts = sorted(sorted(v) for v in islands.values())
        report.warnings.append(f"network is split into {len(parts)} islands with injections or load: {parts}")


@dataclass(frozen=True)
class Incidence:
    """Per-bus partitions: ``lines_in[n]`` are lines whose ``to_bus`` is n,
    ``lines_out[n]`` lines whose ``from_bus`` is n; the component maps hold
    indices into the network's component tuples."""

    lines_in: dict[str, list[int]]
    lines_out: dict[str, list[int]]
    generators: dict[str, list[int]]
    loads: dict[str, list[int]]
    imports: dict[str, list[int]]
    renewables: dict[str, list[int]]
    wind_farms: dict[str, list[int]]


def incidence(net: Network) -> Incidence:
    def by_bus(items, key=lambda x: x.bus):
        out = {b.id: [] for b in net.buses}
        for k, item in enumerate(items):
            out[key(item)].append(k)
        return out

    return Incidence(
        lines_in=by_bus(net.lines, key=lambda ln: ln.to_bus),
        lines_out=by_bus(net.lines, key=lambda ln: ln.from_bus),
        generators=by_bus(net.generators),
        loads=by_bus(net.loads),
        imports=by_bus(net.imports),
        renewables=by_bus(net.renewables),
        wind_farms=by_bus(net.wind_farms),
    )


# ---------------------------------------------------------------- documents

def network_schema() -> dict:
    text = resources.files("stranded_grid").joinpath("schemas/network.schema.json").read_text()
    return json.loads(text)


def _schema_errors(doc) -> list[str]:
    import jsonschema

    validator = jsonschema.Draft7Validator(network_schema())
    out = []
    for err in sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path))):
        where = ".".join(str(p) for p in err.absolute_path) or "<root>"
        out.append(f"{where}: {err.message}")
    return out


def _series(v):
    return None if v is None else tuple(float(x) for x in v)


def network_from_dict(doc: Mapping[str, Any], check: bool = True) -> Network:
    if check:
        problems = _schema_errors(doc)
        if problems:
            raise NetworkError("schema violation: " + "; ".join(problems))
    profiles = {}
    for day, prof in doc.get("day_profiles", {}).items():
        profiles[day] = DayProfile(
            loads={k: _series(v) for k, v in prof.get("loads", {}).items()},
            imports={k: _series(v) for k, v in prof.get("imports", {}).items()},
            renewables={k: _series(v) for k, v in prof.get("renewables", {}).items()},
        )
    net = Network(
        name=doc.get("name", "network"),
        horizon=int(doc["horizon"]),
        period_hours=float(doc.get("period_hours", 1.0)),
        buses=tuple(Bus(b["id"], float(b.get("theta_min", -180.0)), float(b.get("theta_max", 180.0)))
                    for b in doc["buses"]),
        lines=tuple(Line(x["id"], x["from_bus"], x["to_bus"], float(x["susceptance"]), float(x["flow_max"]))
                    for x in doc.get("lines", [])),
        generators=tuple(ThermalGenerator(x["id"], x["bus"], float(x["cost"]), float(x["p_max"]),
                                          float(x["ramp_up"]), float(x["ramp_down"]),
                                          float(x.get("p_initial", 0.0)))
                         for x in doc.get("generators", [])),
        loads=tuple(FixedLoad(x["id"], x["bus"], _series(x["demand"]), float(x["shed_cost"]))
                    for x in doc.get("loads", [])),
        imports=tuple(ImportPoint(x["id"], x["bus"], _series(x["supply"]), float(x["spill_cost"]))
                      for x in doc.get("imports", [])),
        renewables=tuple(RenewableUnit(x["id"], x["bus"], _series(x["supply"]), float(x["spill_cost"]))
                         for x in doc.get("renewables", [])),
        wind_farms=tuple(WindFarm(x["id"], x["bus"], float(x["spill_cost"]), _series(x.get("trajectory")))
                         for x in doc.get("wind_farms", [])),
        day_profiles=profiles,
        dc_lost_value=float(doc.get("dc_lost_value", 0.0)),
    )
    return net


def load_network(source) -> Network:
    """Parse and validate a network from a path, JSON text, or mapping."""
    if isinstance(source, Mapping):
        doc = source
    elif isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        doc = json.loads(Path(source).read_text())
    else:
        doc = json.loads(source)
    net = network_from_dict(doc)
    report = validate_network(net)
    if report.errors:
        raise NetworkError("invalid network: " + "; ".join(report.errors))
    return net


def network_to_dict(net: Network) -> dict:
    def opt(d, key, value):
        if value is not None:
            d[key] = list(value)
        return d

    doc = {
        "name": net.name,
        "horizon": net.horizon,
        "period_hours": net.period_hours,
        "buses": [{"id": b.id, "theta_min": b.theta_min, "theta_max": b.theta_max} for b in net.buses],
        "lines": [{"id": x.id, "from_bus": x.from_bus, "to_bus": x.to_bus, "susceptance": x.susceptance,
                   "flow_max": x.flow_max} for x in net.lines],
        "generators": [{"id": g.id, "bus": g.bus, "cost": g.cost, "p_max": g.p_max, "ramp_up": g.ramp_up,
                        "ramp_down": g.ramp_down, "p_initial": g.p_initial} for g in net.generators],
        "loads": [{"id": x.id, "bus": x.bus, "demand": list(x.demand), "shed_cost": x.shed_cost}
                  for x in net.loads],
        "imports": [{"id": x.id, "bus": x.bus, "supply": list(x.supply), "spill_cost": x.spill_cost}
                    for x in net.imports],
        "renewables": [{"id": x.id, "bus": x.bus, "supply": list(x.supply), "spill_cost": x.spill_cost}
                       for x in net.renewables],
        "wind_farms": [opt({"id": w.id, "bus": w.bus, "spill_cost": w.spill_cost}, "trajectory", w.trajectory)
                       for w in net.wind_farms],
    }
    if net.day_profiles:
        doc["day_profiles"] = {
            day: {k: {cid: list(s) for cid, s in getattr(p, k).items()}
                  for k in ("loads", "imports", "renewables") if getattr(p, k)}
            for day, p in net.day_profiles.items()
        }
    if net.dc_lost_value:
        doc["dc_lost_value"] = net.dc_lost_value
    return doc


def dump_network(net: Network, path) -> None:
    Path(path).write_text(json.dumps(network_to_dict(net), indent=1) + "\n")
