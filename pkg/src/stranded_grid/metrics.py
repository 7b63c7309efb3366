"""Dispatch performance metrics: absorbed power split by LMP sign, stranded
power, RPS, wind penetration, data-center achieved capacity and
probability-weighted ensemble statistics. All energies are MWh."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Sequence

import numpy as np

from .dispatch import DispatchInputs, DispatchSolution, supply_arrays
from .network import Network
from .scenario import ScenarioSet, expected_wind_energy

SERVED_THRESHOLD = 1e-6  # MW; u at or below this counts as unserved


@dataclass(frozen=True)
class MetricReport:
    cost: float
    dispatched_total: float
    absorbed_pos_lmp: float
    absorbed_nonpos_lmp: float
    thermal: float
    spill_wind: float
    spill_import: float
    spill_renewable: float
    stranded: float
    rps: float
    wind_penetration: float
    load_shed: float
    wind_absorbed_pos_lmp: float
    wind_absorbed_nonpos_lmp: float
    dc_served: float

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_dict(self) -> dict:
        return asdict(self)


def _absorbed(sol: DispatchSolution) -> np.ndarray:
    """Supply absorbed at each bus and period, shape (buses, T)."""
    net = sol.net
    _, M, W, R = supply_arrays(sol.inputs)
    out = np.zeros((len(net.buses), net.horizon))
    bi = net.bus_index
    for items, values in ((net.generators, sol.p), (net.imports, M - sol.m),
                          (net.wind_farms, W - sol.w), (net.renewables, R - sol.r)):
        for k, item in enumerate(items):
            out[bi[item.bus]] += values[k]
    return out


def total_dispatched(sol: DispatchSolution, inputs: DispatchInputs | None = None) -> float:
    return float(_absorbed(sol).sum() * sol.net.period_hours)


def _require_lmp(sol):
    if sol.lmp is None or np.isnan(sol.lmp).any():
        raise ValueError("dispatch solution carries no LMPs")


def split_by_lmp(sol: DispatchSolution, inputs: DispatchInputs | None = None) -> tuple[float, float]:
    """Absorbed energy at buses with strictly positive LMP, and the rest."""
    _require_lmp(sol)
    absorbed = _absorbed(sol) * sol.net.period_hours
    pos = float(absorbed[sol.lmp > 0].sum())
    nonpos = float(absorbed[~(sol.lmp > 0)].sum())
    return pos, nonpos


def spillage(sol: DispatchSolution) -> dict[str, float]:
    h = sol.net.period_hours
    return {"wind": float(sol.w.sum() * h), "import": float(sol.m.sum() * h),
            "renewable": float(sol.r.sum() * h)}


def stranded_power(sol: DispatchSolution, inputs: DispatchInputs | None = None) -> float:
    _, nonpos = split_by_lmp(sol)
    return nonpos + sum(spillage(sol).values())


def rps(sol: DispatchSolution, inputs: DispatchInputs | None = None) -> float:
    """Percent of demand (before shedding) met by absorbed wind and renewables."""
    D, _, W, R = supply_arrays(sol.inputs)
    demand = D.sum()
    if demand <= 0:
        return math.nan
    return float(100.0 * ((R - sol.r).sum() + (W - sol.w).sum()) / demand)


def wind_penetration(source, net: Network | None = None, farms: Sequence[str] | None = None) -> float:
    """Wind energy as a percent of demand.

    ``source`` is a single realization (:class:`DispatchInputs`) or a
    :class:`ScenarioSet`, in which case ``net`` is required and the expected
    wind energy is used. ``farms`` restricts which farms count.
    """
    if isinstance(source, ScenarioSet):
        if net is None:
            raise ValueError("wind_penetration of a scenario set needs the network")
        wind = expected_wind_energy(source, net.period_hours, farms)
        demand = net.total_demand()
    else:
        net = source.net
        keep = [k for k, w in enumerate(net.wind_farms) if farms is None or w.id in farms]
        wind = float(source.wind[keep].sum()) * net.period_hours
        demand = net.total_demand()
    return math.nan if demand <= 0 else 100.0 * wind / demand


def metric_report(sol: DispatchSolution, penetration_farms: Sequence[str] | None = None) -> MetricReport:
    h = sol.net.period_hours
    pos, nonpos = split_by_lmp(sol)
    spill = spillage(sol)
    net = sol.net
    W = sol.inputs.wind
    wind_abs = np.zeros((len(net.buses), net.horizon))
    for k, farm in enumerate(net.wind_farms):
        wind_abs[net.bus_index[farm.bus]] += W[k] - sol.w[k]
    wind_pos = float(wind_abs[sol.lmp > 0].sum() * h)
    wind_nonpos = float(wind_abs[~(sol.lmp > 0)].sum() * h)
    return MetricReport(
        cost=sol.objective,
        dispatched_total=pos + nonpos,
        absorbed_pos_lmp=pos,
        absorbed_nonpos_lmp=nonpos,
        thermal=float(sol.p.sum() * h),
        spill_wind=spill["wind"],
        spill_import=spill["import"],
        spill_renewable=spill["renewable"],
        stranded=nonpos + sum(spill.values()),
        rps=rps(sol),
        wind_penetration=wind_penetration(sol.inputs, farms=penetration_farms),
        load_shed=float(sol.d.sum() * h),
        wind_absorbed_pos_lmp=wind_pos,
        wind_absorbed_nonpos_lmp=wind_nonpos,
        dc_served=float(sol.u.sum() * h),
    )


def check_identities(rep: MetricReport, tol: float = 1e-6) -> list[str]:
    """Violated report identities, scaled by ``1 + magnitude``."""
    bad = []
    lhs = rep.absorbed_pos_lmp + rep.absorbed_nonpos_lmp
    if abs(rep.dispatched_total - lhs) > tol * (1 + abs(lhs)):
        bad.append("dispatched != pos + nonpos")
    rhs = rep.absorbed_nonpos_lmp + rep.spill_wind + rep.spill_import + rep.spill_renewable
    if abs(rep.stranded - rhs) > tol * (1 + abs(rhs)):
        bad.append("stranded != nonpos + spillage")
    return bad


@dataclass(frozen=True)
class AchievedCapacity:
    count: np.ndarray  # (scenarios, T): buses drawing power / K
    energy: np.ndarray  # (scenarios,): served energy / (K * U * T)
    count_profile: np.ndarray  # (T,) probability-weighted
    count_mean: float
    energy_mean: float


def achieved_capacity(served: Sequence, K: int, probabilities=None, capacity: float | None = None) -> AchievedCapacity:
    """Achieved data-center capacity over scenarios.

    ``served`` holds one (buses, T) array of ``u`` per scenario, or
    DispatchSolutions. The count form is the number of buses drawing more
    than 1e-6 MW divided by K; the energy form is served energy over
    ``K * U * T`` and needs ``capacity`` (U).
    """
    if K <= 0:
        raise ValueError("achieved capacity needs K > 0")
    us = [s.u if isinstance(s, DispatchSolution) else np.asarray(s, dtype=float) for s in served]
    if not us:
        raise ValueError("no scenarios")
    probs = np.full(len(us), 1.0 / len(us)) if probabilities is None else np.asarray(probabilities, dtype=float)
    count = np.array([(u > SERVED_THRESHOLD).sum(axis=0) / K for u in us])
    if capacity is None:
        caps = [s.inputs.capacity for s in served if isinstance(s, DispatchSolution)]
        capacity = caps[0] if caps else math.nan
    T = us[0].shape[1]
    denom = K * capacity * T
    energy = np.array([u.sum() / denom if denom > 0 else math.nan for u in us])
    profile = probs @ count
    return AchievedCapacity(count, energy, profile, float(profile.mean()), float(probs @ energy))


@dataclass(frozen=True)
class EnsembleStats:
    mean_cost: float
    std_cost: float
    means: dict
    n: int


def weighted_mean_std(values, weights) -> tuple[float, float]:
    """Probability-weighted mean and population standard deviation.

    Shifted by the first value so identical inputs give exactly zero spread.
    """
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    shift = v[0]
    dv = v - shift
    mean_dv = float(w @ dv)
    var = float(w @ (dv - mean_dv) ** 2)
    return shift + mean_dv, math.sqrt(max(var, 0.0))


def ensemble_stats(reports: Sequence[MetricReport], probabilities) -> EnsembleStats:
    if not reports:
        raise ValueError("no reports")
    means = {}
    for name in MetricReport.field_names():
        means[name], _ = weighted_mean_std([getattr(r, name) for r in reports], probabilities)
    mean, std = weighted_mean_std([r.cost for r in reports], probabilities)
    return EnsembleStats(mean, std, means, len(reports))
