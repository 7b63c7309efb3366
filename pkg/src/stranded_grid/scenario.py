"""Wind scenario sets: CSV ingestion, probability normalization and
penetration-level scaling."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .network import Network

SEASONS = ("Spring", "Summer", "Fall", "Winter")
KINDS = ("WD", "WE")

SCENARIO_HEADER = ("scenario_id", "farm_id", "period", "mw", "weight")


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class DayType:
    season: str
    kind: str

    def __post_init__(self):
        if self.season not in SEASONS or self.kind not in KINDS:
            raise ValueError(f"bad day type {self.season}{self.kind}")

    @property
    def name(self) -> str:
        return f"{self.season}{self.kind}"

    @classmethod
    def parse(cls, name: str) -> "DayType":
        return cls(name[:-2], name[-2:])


DAY_TYPES = tuple(DayType(s, k) for s in SEASONS for k in KINDS)


@dataclass(frozen=True)
class WindScenario:
    id: str
    probability: float
    trajectories: Mapping[str, tuple]  # farm id -> MW per period

    def matrix(self, farm_ids: Sequence[str]) -> np.ndarray:
        return np.array([self.trajectories[f] for f in farm_ids], dtype=float)


@dataclass(frozen=True)
class ScenarioSet:
    scenarios: tuple[WindScenario, ...]
    day_type: str | None = None

    def __post_init__(self):
        if not self.scenarios:
            raise ScenarioError("a scenario set needs at least one scenario")
        farms = set(self.scenarios[0].trajectories)
        for s in self.scenarios[1:]:
            if set(s.trajectories) != farms:
                raise ScenarioError(f"scenario {s.id} covers a different set of wind farms")

    def __len__(self):
        return len(self.scenarios)

    def __iter__(self):
        return iter(self.scenarios)

    @property
    def farm_ids(self) -> tuple[str, ...]:
        return tuple(self.scenarios[0].trajectories)

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([s.probability for s in self.scenarios])

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.scenarios]

    def cube(self, farm_ids: Sequence[str] | None = None) -> np.ndarray:
        """Array of shape (scenarios, farms, periods)."""
        farm_ids = self.farm_ids if farm_ids is None else farm_ids
        return np.stack([s.matrix(farm_ids) for s in self.scenarios])

    def map_trajectories(self, fn) -> "ScenarioSet":
        """Apply ``fn(farm_id, array) -> array`` to every trajectory."""
        out = []
        for s in self.scenarios:
            traj = {f: tuple(float(v) for v in fn(f, np.asarray(w, dtype=float)))
                    for f, w in s.trajectories.items()}
            out.append(replace(s, trajectories=traj))
        return replace(self, scenarios=tuple(out))

    def with_farms(self, extra: Mapping[str, Sequence[Sequence[float]]]) -> "ScenarioSet":
        """Add farms; ``extra[farm]`` holds one trajectory per scenario."""
        out = []
        for k, s in enumerate(self.scenarios):
            traj = dict(s.trajectories)
            for f, rows in extra.items():
                if f in traj:
                    raise ScenarioError(f"farm {f} already present")
                traj[f] = tuple(float(v) for v in rows[k])
            out.append(replace(s, trajectories=traj))
        return replace(self, scenarios=tuple(out))

    @classmethod
    def deterministic(cls, net: Network, day_type: str | None = None) -> "ScenarioSet":
        """Single scenario built from the farms' attached trajectories."""
        traj = {}
        for w in net.wind_farms:
            traj[w.id] = tuple(w.trajectory) if w.trajectory is not None else (0.0,) * net.horizon
        return cls((WindScenario("det", 1.0, traj),), day_type=day_type)


def normalize_probabilities(sset: ScenarioSet) -> ScenarioSet:
    w = sset.probabilities
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ScenarioError("scenario weights must be finite and nonnegative")
    total = math.fsum(w)
    if total <= 0:
        raise ScenarioError("scenario weights sum to zero")
    return replace(sset, scenarios=tuple(replace(s, probability=float(s.probability / total))
                                          for s in sset.scenarios))


def _scenario_key(sid: str):
    return (0, int(sid), "") if sid.lstrip("-").isdigit() else (1, 0, sid)


def load_scenarios(source, net: Network, day_type: str | None = None) -> ScenarioSet:
    """Read the ``scenario_id,farm_id,period,mw,weight`` CSV format.

    ``period`` is 0-based. Weights may be raw counts; they are normalized.
    Scenarios are ordered by id (numerically when all ids are integers).
    """
    if isinstance(source, (str, Path)) and "\n" not in str(source):
        text = Path(source).read_text()
    else:
        text = source
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != SCENARIO_HEADER:
        raise ScenarioError(f"expected header {','.join(SCENARIO_HEADER)}, got {reader.fieldnames}")
    farms = {w.id for w in net.wind_farms}
    T = net.horizon
    weights: dict[str, float] = {}
    data: dict[str, dict[str, dict[int, float]]] = {}
    for lineno, row in enumerate(reader, start=2):
        sid, fid = row["scenario_id"], row["farm_id"]
        if fid not in farms:
            raise ScenarioError(f"line {lineno}: unknown wind farm {fid!r}")
        try:
            t, mw, wt = int(row["period"]), float(row["mw"]), float(row["weight"])
        except (TypeError, ValueError) as exc:
            raise ScenarioError(f"line {lineno}: {exc}") from exc
        if not 0 <= t < T:
            raise ScenarioError(f"line {lineno}: period {t} outside 0..{T - 1}")
        if not (math.isfinite(mw) and mw >= 0):
            raise ScenarioError(f"line {lineno}: negative or non-finite power {mw}")
        if sid in weights and weights[sid] != wt:
            raise ScenarioError(f"line {lineno}: weight {wt} for scenario {sid} differs from {weights[sid]}")
        weights.setdefault(sid, wt)
        per = data.setdefault(sid, {}).setdefault(fid, {})
        if t in per:
            raise ScenarioError(f"line {lineno}: duplicate period {t} for scenario {sid}, farm {fid}")
        per[t] = mw

    scenarios = []
    for sid in sorted(data, key=_scenario_key):
        traj = {}
        for fid in sorted(data[sid]):
            per = data[sid][fid]
            if len(per) != T:
                raise ScenarioError(f"scenario {sid}, farm {fid}: {len(per)} periods, expected {T}")
            traj[fid] = tuple(per[t] for t in range(T))
        scenarios.append(WindScenario(sid, weights[sid], traj))
    if not scenarios:
        raise ScenarioError("no scenario rows")
    return normalize_probabilities(ScenarioSet(tuple(scenarios), day_type=day_type))


def scenarios_to_csv(sset: ScenarioSet) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCENARIO_HEADER)
    for s in sset.scenarios:
        for fid, traj in s.trajectories.items():
            for t, mw in enumerate(traj):
                w.writerow([s.id, fid, t, repr(float(mw)), repr(float(s.probability))])
    return buf.getvalue()


def expected_wind_energy(sset: ScenarioSet, period_hours: float = 1.0,
                         farms: Iterable[str] | None = None) -> float:
    """Probability-weighted wind energy over the horizon (MWh)."""
    farms = list(sset.farm_ids if farms is None else farms)
    if not farms:
        return 0.0
    per_scenario = sset.cube(farms).sum(axis=(1, 2))
    return float(sset.probabilities @ per_scenario) * period_hours


def scale_to_penetration(sset: ScenarioSet, net: Network, level: float,
                         farms: Iterable[str] | None = None) -> ScenarioSet:
    """Rescale trajectories by one scalar so that expected wind energy is
    ``level`` times the network's demand. Only ``farms`` (default: all farms
    in the set) are scaled and counted."""
    if not level >= 0:
        raise ScenarioError(f"penetration level must be nonnegative, got {level}")
    farms = set(sset.farm_ids if farms is None else farms)
    base = expected_wind_energy(sset, net.period_hours, sorted(farms))
    if level == 0:
        k = 0.0
    elif base <= 0:
        raise ScenarioError("cannot scale a scenario set with zero wind energy")
    else:
        k = level * net.total_demand() / base
    return sset.map_trajectories(lambda f, w: w * k if f in farms else w)
