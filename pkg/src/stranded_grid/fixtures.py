"""Seeded generators for the desk-scale networks and wind scenario sets
shipped under ``stranded_grid/data``.

``python -m stranded_grid.fixtures <dir>`` rewrites every file; the test
suite checks the shipped copies are byte-identical to a fresh run.
"""

from __future__ import annotations

import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .network import Network, dump_network, load_network, network_from_dict
from .scenario import (DAY_TYPES, SEASONS, ScenarioSet, WindScenario, normalize_probabilities,
                       scenarios_to_csv)

SEED = 20170501
VOLL = 1000.0
IMPORT_SPILL = 1000.0
RENEWABLE_SPILL = 2000.0
WIND_SPILL = 100.0

SEASON_LOAD = {"Spring": 1.0, "Summer": 1.15, "Fall": 0.95, "Winter": 1.05}
KIND_LOAD = {"WD": 1.0, "WE": 0.85}
SEASON_WIND = {"Spring": 1.2, "Summer": 0.7, "Fall": 1.0, "Winter": 1.1}
SEASON_SUN = {"Spring": 1.0, "Summer": 1.3, "Fall": 0.8, "Winter": 0.6}


def _r(a) -> list[float]:
    return [round(float(v), 3) for v in a]


def _daily_load(T: int) -> np.ndarray:
    h = np.arange(T) * 24.0 / T
    return 0.75 + 0.25 * np.sin((h - 9.0) * np.pi / 12.0) ** 2 * (h > 6)


def _solar(T: int) -> np.ndarray:
    h = np.arange(T) * 24.0 / T + 0.5
    return np.clip(np.sin((h - 6.0) * np.pi / 13.0), 0.0, None)


def _wind_shape(T: int) -> np.ndarray:
    # stronger at night
    h = np.arange(T) * 24.0 / T
    return 0.6 + 0.4 * np.cos(h * np.pi / 12.0)


def demo5() -> dict:
    """Five buses, six lines, three thermal units, wind at two buses. Most
    wind sits at b5 behind two weak lines, so it strands readily."""
    T = 24
    shape = _daily_load(T)
    peaks = {"L2": 180.0, "L3": 220.0, "L4": 160.0}
    buses = {"L2": "b2", "L3": "b3", "L4": "b4"}
    sun = _solar(T)
    doc = {
        "name": "demo5",
        "horizon": T,
        "period_hours": 1.0,
        "buses": [{"id": f"b{k}"} for k in range(1, 6)],
        "lines": [
            {"id": "l12", "from_bus": "b1", "to_bus": "b2", "susceptance": 10.0, "flow_max": 150.0},
            {"id": "l13", "from_bus": "b1", "to_bus": "b3", "susceptance": 10.0, "flow_max": 120.0},
            {"id": "l23", "from_bus": "b2", "to_bus": "b3", "susceptance": 8.0, "flow_max": 100.0},
            {"id": "l24", "from_bus": "b2", "to_bus": "b4", "susceptance": 8.0, "flow_max": 100.0},
            {"id": "l35", "from_bus": "b3", "to_bus": "b5", "susceptance": 6.0, "flow_max": 10.0},
            {"id": "l45", "from_bus": "b4", "to_bus": "b5", "susceptance": 6.0, "flow_max": 10.0},
        ],
        "generators": [
            {"id": "g1", "bus": "b1", "cost": 15.0, "p_max": 300.0, "ramp_up": 80.0, "ramp_down": 80.0,
             "p_initial": 60.0},
            {"id": "g4", "bus": "b4", "cost": 35.0, "p_max": 250.0, "ramp_up": 100.0, "ramp_down": 100.0,
             "p_initial": 50.0},
            {"id": "g3", "bus": "b3", "cost": 70.0, "p_max": 200.0, "ramp_up": 200.0, "ramp_down": 200.0},
        ],
        "loads": [{"id": k, "bus": buses[k], "demand": _r(peaks[k] * shape), "shed_cost": VOLL} for k in peaks],
        "imports": [{"id": "m3", "bus": "b3", "supply": _r(np.full(T, 40.0)), "spill_cost": IMPORT_SPILL}],
        "renewables": [{"id": "r2", "bus": "b2", "supply": _r(60.0 * sun), "spill_cost": RENEWABLE_SPILL}],
        "wind_farms": [
            {"id": "w1", "bus": "b1", "spill_cost": WIND_SPILL, "trajectory": _r(20.0 * _wind_shape(T))},
            {"id": "w5", "bus": "b5", "spill_cost": WIND_SPILL, "trajectory": _r(100.0 * _wind_shape(T))},
        ],
        "day_profiles": {},
    }
    for dt in DAY_TYPES:
        f = SEASON_LOAD[dt.season] * KIND_LOAD[dt.kind]
        doc["day_profiles"][dt.name] = {
            "loads": {k: _r(peaks[k] * f * shape) for k in peaks},
            "imports": {"m3": _r(np.full(T, 40.0 if dt.kind == "WD" else 30.0))},
            "renewables": {"r2": _r(60.0 * SEASON_SUN[dt.season] * sun)},
        }
    return doc


def tiny3() -> dict:
    """Three buses in a line, wind at one end behind a tight line."""
    T = 6
    return {
        "name": "tiny3",
        "horizon": T,
        "buses": [{"id": "a"}, {"id": "b"}, {"id": "c"}],
        "lines": [
            {"id": "ab", "from_bus": "a", "to_bus": "b", "susceptance": 5.0, "flow_max": 30.0},
            {"id": "bc", "from_bus": "b", "to_bus": "c", "susceptance": 5.0, "flow_max": 60.0},
        ],
        "generators": [{"id": "gc", "bus": "c", "cost": 25.0, "p_max": 120.0, "ramp_up": 40.0, "ramp_down": 40.0,
                        "p_initial": 40.0}],
        "loads": [{"id": "dc", "bus": "c", "demand": _r([50, 45, 60, 80, 75, 55]), "shed_cost": VOLL},
                  {"id": "db", "bus": "b", "demand": _r([10, 10, 15, 20, 20, 15]), "shed_cost": VOLL}],
        "wind_farms": [{"id": "wa", "bus": "a", "spill_cost": WIND_SPILL}],
    }


def tiny4() -> dict:
    """Four-bus ring with two wind farms and an import."""
    T = 12
    shape = _daily_load(T)
    return {
        "name": "tiny4",
        "horizon": T,
        "buses": [{"id": f"n{k}"} for k in range(1, 5)],
        "lines": [
            {"id": "r12", "from_bus": "n1", "to_bus": "n2", "susceptance": 4.0, "flow_max": 50.0},
            {"id": "r23", "from_bus": "n2", "to_bus": "n3", "susceptance": 4.0, "flow_max": 50.0},
            {"id": "r34", "from_bus": "n3", "to_bus": "n4", "susceptance": 4.0, "flow_max": 40.0},
            {"id": "r41", "from_bus": "n4", "to_bus": "n1", "susceptance": 4.0, "flow_max": 40.0},
        ],
        "generators": [
            {"id": "g2", "bus": "n2", "cost": 20.0, "p_max": 150.0, "ramp_up": 60.0, "ramp_down": 60.0,
             "p_initial": 30.0},
            {"id": "g4", "bus": "n4", "cost": 45.0, "p_max": 100.0, "ramp_up": 100.0, "ramp_down": 100.0},
        ],
        "loads": [{"id": "d2", "bus": "n2", "demand": _r(70 * shape), "shed_cost": VOLL},
                  {"id": "d3", "bus": "n3", "demand": _r(60 * shape), "shed_cost": VOLL}],
        "imports": [{"id": "m4", "bus": "n4", "supply": _r(np.full(T, 10.0)), "spill_cost": IMPORT_SPILL}],
        "wind_farms": [{"id": "w1", "bus": "n1", "spill_cost": WIND_SPILL},
                       {"id": "w3", "bus": "n3", "spill_cost": WIND_SPILL}],
    }


def one_bus() -> dict:
    return {"name": "one_bus", "horizon": 1, "buses": [{"id": "b1"}],
            "generators": [{"id": "g", "bus": "b1", "cost": 10.0, "p_max": 100.0, "ramp_up": 100.0,
                            "ramp_down": 100.0}],
            "loads": [{"id": "l", "bus": "b1", "demand": [50.0], "shed_cost": VOLL}]}


def two_bus() -> dict:
    return {"name": "two_bus", "horizon": 1, "buses": [{"id": "b1"}, {"id": "b2"}],
            "lines": [{"id": "l12", "from_bus": "b1", "to_bus": "b2", "susceptance": 10.0, "flow_max": 40.0}],
            "generators": [{"id": "g", "bus": "b2", "cost": 10.0, "p_max": 100.0, "ramp_up": 100.0,
                            "ramp_down": 100.0}],
            "loads": [{"id": "l", "bus": "b2", "demand": [50.0], "shed_cost": VOLL}],
            "wind_farms": [{"id": "w", "bus": "b1", "spill_cost": WIND_SPILL, "trajectory": [100.0]}]}


def wind_scenarios(net: Network, n: int, rng: np.random.Generator, caps: dict[str, float],
                   level: float = 1.0, weights=None) -> ScenarioSet:
    """AR(1) multiplicative noise around a diurnal shape, clipped to the
    farm capacity."""
    T = net.horizon
    shape = _wind_shape(T)
    out = []
    for s in range(n):
        traj = {}
        common = rng.normal(0.0, 0.35)
        for farm in net.wind_farms:
            e = np.empty(T)
            e[0] = rng.normal(0.0, 0.3)
            for t in range(1, T):
                e[t] = 0.8 * e[t - 1] + rng.normal(0.0, 0.18)
            cap = caps[farm.id]
            traj[farm.id] = tuple(_r(np.clip(cap * level * shape * np.exp(common + e - 0.1), 0.0, cap)))
        w = 1.0 if weights is None else float(weights[s])
        out.append(WindScenario(str(s), w, traj))
    return normalize_probabilities(ScenarioSet(tuple(out)))


DEMO5_CAPS = {"w1": 40.0, "w5": 250.0}


def generate(outdir) -> list[Path]:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    rng = np.random.default_rng(SEED)
    nets = {"demo5": demo5(), "tiny3": tiny3(), "tiny4": tiny4(), "one_bus": one_bus(), "two_bus": two_bus()}
    for name, doc in nets.items():
        path = out / f"{name}.json"
        dump_network(network_from_dict(doc), path)
        written.append(path)

    net5 = load_network(nets["demo5"])
    for season in SEASONS:
        sset = wind_scenarios(net5, 10, rng, DEMO5_CAPS, level=SEASON_WIND[season])
        path = out / f"demo5_{season}.csv"
        path.write_text(scenarios_to_csv(sset))
        written.append(path)

    net3 = load_network(nets["tiny3"])
    path = out / "tiny3.csv"
    path.write_text(scenarios_to_csv(wind_scenarios(net3, 8, rng, {"wa": 90.0}, level=1.2,
                                                    weights=rng.integers(1, 4, 8))))
    written.append(path)
    net4 = load_network(nets["tiny4"])
    path = out / "tiny4.csv"
    path.write_text(scenarios_to_csv(wind_scenarios(net4, 12, rng, {"w1": 80.0, "w3": 60.0}, level=1.1)))
    written.append(path)

    config = {
        "network": "demo5.json",
        "scenarios": {s: f"demo5_{s}.csv" for s in SEASONS},
        "day_types": ["SpringWD", "SummerWE"],
        "wind_levels": [0.0, 0.05, 0.15, 0.3, 0.5],
        "cases": [
            {"case_id": 1},
            {"case_id": 2, "dc_count": 2, "dc_size": 50.0, "dc_buses": ["b1", "b5"]},
            {"case_id": 3, "dc_count": 2, "dc_size": 50.0, "dc_buses": ["b1", "b5"],
             "capacity_factor": 0.3},
            {"case_id": 4, "dc_count": 2, "dc_size": 50.0},
        ],
        "placement": {"method": "benders", "tol": 1e-6, "cut_mode": "multi"},
        "output": "out",
    }
    path = out / "experiment.json"
    path.write_text(json.dumps(config, indent=1) + "\n")
    written.append(path)
    return written


def data_path(name: str) -> Path:
    """Path of a shipped fixture file."""
    return Path(str(resources.files("stranded_grid") / "data" / name))


if __name__ == "__main__":  # pragma: no cover
    for p in generate(sys.argv[1] if len(sys.argv) > 1 else data_path("")):
        print(p)
