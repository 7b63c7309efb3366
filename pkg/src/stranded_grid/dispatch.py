"""DC economic dispatch over a multi-period horizon.

The LP minimizes thermal cost plus penalties for load shedding and for
spilling imports, wind and other renewables, subject to nodal balance, the
lossless flow law ``f = B (theta_to - theta_from)``, ramping (including the
first period against ``p_initial``), line limits and angle bounds. Optional
dispatchable loads ``u[n, t] <= U * x[n]`` add uncosted demand at each bus.

Objective coefficients are scaled by ``period_hours`` so the objective is
in dollars; LMPs are reported per MWh.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import lp as lpcore
from .lp import INF, LinearProgram, LpBuilder
from .network import Network, incidence
from .scenario import WindScenario


class DispatchError(RuntimeError):
    pass


@dataclass(frozen=True)
class DispatchInputs:
    """Everything one dispatch needs: a day-specific network, one wind
    realization, and optionally dispatchable-load capacities."""

    net: Network
    wind: np.ndarray  # (farms, T), ordered as net.wind_farms
    placement: np.ndarray | None = None  # (buses,) counts x_n
    capacity: float = 0.0  # U, MW per dispatchable load
    scenario_id: str = "det"

    @classmethod
    def make(cls, net: Network, scenario: WindScenario | Mapping | None = None, day: str | None = None,
             placement=None, capacity: float = 0.0) -> "DispatchInputs":
        net = net.for_day(day)
        T = net.horizon
        if scenario is None:
            traj = {w.id: w.trajectory for w in net.wind_farms}
            sid = "det"
        elif isinstance(scenario, WindScenario):
            traj, sid = scenario.trajectories, scenario.id
        else:
            traj, sid = scenario, "det"
        rows = []
        for w in net.wind_farms:
            series = traj.get(w.id)
            if series is None:
                raise DispatchError(f"no wind trajectory for farm {w.id}")
            if len(series) != T:
                raise DispatchError(f"trajectory for farm {w.id} has length {len(series)}, expected {T}")
            rows.append(series)
        wind = np.array(rows, dtype=float).reshape(len(net.wind_farms), T)
        if np.any(wind < 0):
            raise DispatchError("wind trajectories must be nonnegative")
        x = None
        if placement is not None:
            x = _placement_vector(net, placement)
        return cls(net, wind, x, float(capacity), sid)

    def with_placement(self, placement, capacity: float) -> "DispatchInputs":
        return DispatchInputs(self.net, self.wind, _placement_vector(self.net, placement),
                              float(capacity), self.scenario_id)


def _placement_vector(net: Network, placement) -> np.ndarray:
    if isinstance(placement, Mapping):
        x = np.zeros(len(net.buses))
        for bus, count in placement.items():
            x[net.bus_index[bus]] = count
    else:
        x = np.asarray(placement, dtype=float)
        if x.shape != (len(net.buses),):
            raise DispatchError(f"placement must have one entry per bus ({len(net.buses)})")
    if np.any(x < 0) or np.any(x != np.round(x)):
        raise DispatchError("placement counts must be nonnegative integers")
    return x


@dataclass(frozen=True)
class EdIndex:
    """Variable and row indices, each shaped (items, T)."""

    p: np.ndarray
    d: np.ndarray
    f: np.ndarray
    theta: np.ndarray
    m: np.ndarray
    w: np.ndarray
    r: np.ndarray
    u: np.ndarray | None
    balance: np.ndarray
    flow: np.ndarray
    ramp: np.ndarray
    cap: np.ndarray | None

    def lookup(self, symbol: str, item: int, t: int) -> int:
        return int(getattr(self, symbol)[item, t])


def add_ed_block(b: LpBuilder, inputs: DispatchInputs, tag: str = "", cost_weight: float = 1.0,
                 with_u: bool | None = None, x_vars: Mapping[int, int] | None = None) -> EdIndex:
    """Append one copy of the dispatch model to ``b``.

    ``cost_weight`` multiplies every objective coefficient (scenario
    probability in the extensive form). Capacity rows read
    ``u[n, t] <= U * x[n]``. With ``x_vars`` (bus position -> variable
    index) the placement is a decision variable; otherwise the right-hand
    side comes from ``inputs.placement`` (zero when absent).
    """
    net = inputs.net
    T = net.horizon
    h = net.period_hours * cost_weight
    inc = incidence(net)
    buses = [bus.id for bus in net.buses]
    sfx = tag

    def block(name, items, lb, ub, cost):
        idx = np.empty((len(items), T), dtype=np.int64)
        for k, item in enumerate(items):
            for t in range(T):
                idx[k, t] = b.add_var(f"{name}[{item.id},{t}]{sfx}", lb(k, t), ub(k, t), cost(k))
        return idx

    p = block("p", net.generators, lambda k, t: 0.0, lambda k, t: net.generators[k].p_max,
              lambda k: net.generators[k].cost * h)
    d = block("d", net.loads, lambda k, t: 0.0, lambda k, t: net.loads[k].demand[t],
              lambda k: net.loads[k].shed_cost * h)
    f = block("f", net.lines, lambda k, t: -net.lines[k].flow_max, lambda k, t: net.lines[k].flow_max,
              lambda k: 0.0)
    theta = block("theta", net.buses, lambda k, t: net.buses[k].theta_min, lambda k, t: net.buses[k].theta_max,
                  lambda k: 0.0)
    m = block("m", net.imports, lambda k, t: 0.0, lambda k, t: net.imports[k].supply[t],
              lambda k: net.imports[k].spill_cost * h)
    w = block("w", net.wind_farms, lambda k, t: 0.0, lambda k, t: inputs.wind[k, t],
              lambda k: net.wind_farms[k].spill_cost * h)
    r = block("r", net.renewables, lambda k, t: 0.0, lambda k, t: net.renewables[k].supply[t],
              lambda k: net.renewables[k].spill_cost * h)
    if with_u is None:
        with_u = inputs.placement is not None
    u = block("u", net.buses, lambda k, t: 0.0, lambda k, t: INF, lambda k: 0.0) if with_u else None

    balance = np.empty((len(buses), T), dtype=np.int64)
    for n, bus in enumerate(buses):
        for t in range(T):
            row: dict[int, float] = {}
            rhs = 0.0
            for l in inc.lines_in[bus]:
                row[f[l, t]] = row.get(f[l, t], 0.0) + 1.0
            for l in inc.lines_out[bus]:
                row[f[l, t]] = row.get(f[l, t], 0.0) - 1.0
            for i in inc.generators[bus]:
                row[p[i, t]] = 1.0
            for i in inc.imports[bus]:
                row[m[i, t]] = -1.0
                rhs -= net.imports[i].supply[t]
            for i in inc.wind_farms[bus]:
                row[w[i, t]] = -1.0
                rhs -= inputs.wind[i, t]
            for i in inc.renewables[bus]:
                row[r[i, t]] = -1.0
                rhs -= net.renewables[i].supply[t]
            for j in inc.loads[bus]:
                row[d[j, t]] = 1.0
                rhs += net.loads[j].demand[t]
            if u is not None:
                row[u[n, t]] = -1.0
            balance[n, t] = b.add_row(f"balance[{bus},{t}]{sfx}", row, rhs, rhs)

    flow = np.empty((len(net.lines), T), dtype=np.int64)
    bi = net.bus_index
    for k, ln in enumerate(net.lines):
        for t in range(T):
            row = {f[k, t]: 1.0}
            row[theta[bi[ln.to_bus], t]] = -ln.susceptance
            row[theta[bi[ln.from_bus], t]] = row.get(theta[bi[ln.from_bus], t], 0.0) + ln.susceptance
            flow[k, t] = b.add_row(f"flow[{ln.id},{t}]{sfx}", row, 0.0, 0.0)

    ramp = np.empty((len(net.generators), T), dtype=np.int64)
    for k, g in enumerate(net.generators):
        for t in range(T):
            if t == 0:
                ramp[k, t] = b.add_row(f"ramp[{g.id},{t}]{sfx}", {p[k, 0]: 1.0},
                                       g.p_initial - g.ramp_down, g.p_initial + g.ramp_up)
            else:
                ramp[k, t] = b.add_row(f"ramp[{g.id},{t}]{sfx}", {p[k, t]: 1.0, p[k, t - 1]: -1.0},
                                       -g.ramp_down, g.ramp_up)

    cap = None
    if u is not None:
        x = inputs.placement if inputs.placement is not None else np.zeros(len(buses))
        cap = np.empty((len(buses), T), dtype=np.int64)
        for n, bus in enumerate(buses):
            for t in range(T):
                if x_vars is not None:
                    row = {u[n, t]: 1.0}
                    if n in x_vars:
                        row[x_vars[n]] = -inputs.capacity
                    cap[n, t] = b.add_row(f"cap[{bus},{t}]{sfx}", row, -INF, 0.0)
                else:
                    cap[n, t] = b.add_row(f"cap[{bus},{t}]{sfx}", {u[n, t]: 1.0}, -INF,
                                          inputs.capacity * x[n])
    return EdIndex(p, d, f, theta, m, w, r, u, balance, flow, ramp, cap)


def build_ed(inputs: DispatchInputs, with_u: bool | None = None) -> tuple[LinearProgram, EdIndex]:
    b = LpBuilder(name=f"ed:{inputs.net.name}:{inputs.scenario_id}")
    idx = add_ed_block(b, inputs, with_u=with_u)
    return b.build(), idx


@dataclass
class DispatchSolution:
    inputs: DispatchInputs
    p: np.ndarray
    d: np.ndarray
    f: np.ndarray
    theta: np.ndarray
    lmp: np.ndarray  # $/MWh, (buses, T)
    m: np.ndarray
    w: np.ndarray
    r: np.ndarray
    u: np.ndarray  # (buses, T); zeros without placement
    objective: float
    cap_duals: np.ndarray | None = None  # $/MW per period on u <= U x rows
    backend: str = ""
    extras: dict = field(default_factory=dict)

    @property
    def net(self) -> Network:
        return self.inputs.net


def extract_solution(inputs: DispatchInputs, idx: EdIndex, primal: np.ndarray, duals: np.ndarray | None,
                     objective: float, backend: str = "") -> DispatchSolution:
    net = inputs.net
    h = net.period_hours
    u = primal[idx.u] if idx.u is not None else np.zeros((len(net.buses), net.horizon))
    lmp = duals[idx.balance] / h if duals is not None else np.full((len(net.buses), net.horizon), np.nan)
    cap = duals[idx.cap] if (duals is not None and idx.cap is not None) else None
    return DispatchSolution(inputs, primal[idx.p], primal[idx.d], primal[idx.f], primal[idx.theta], lmp,
                            primal[idx.m], primal[idx.w], primal[idx.r], u, float(objective), cap, backend)


class _DispatchChecks:
    """Tally of model-identity checks on dispatch solutions (test builds)."""

    def __init__(self):
        self.checked = 0
        self.worst = 0.0
        self._lock = threading.Lock()

    def record(self, worst: float):
        with self._lock:
            self.checked += 1
            self.worst = max(self.worst, worst)


dispatch_checks = _DispatchChecks()
IDENTITY_TOL = 1e-8


def solve_ed(inputs: DispatchInputs, backend: str | None = None) -> DispatchSolution:
    lp, idx = build_ed(inputs)
    return solve_built(inputs, lp, idx, backend)


def solve_built(inputs: DispatchInputs, lp: LinearProgram, idx: EdIndex,
                backend: str | None = None) -> DispatchSolution:
    res = lpcore.solve_lp(lp, backend=backend)
    if not res.optimal:
        # shedding and spillage make every dispatch feasible and bounded
        raise DispatchError(f"dispatch LP {lp.name} returned {res.status.value}")
    sol = extract_solution(inputs, idx, res.primal, res.duals, res.objective, res.backend)
    if lpcore.verification.enabled:
        worst = max(model_residuals(sol).values())
        if worst > IDENTITY_TOL:
            raise DispatchError(f"dispatch {lp.name} violates model identities by {worst:.3e}")
        dispatch_checks.record(worst)
    return sol


def net_injection(sol: DispatchSolution) -> np.ndarray:
    """Flow into each bus minus flow out, shape (buses, T)."""
    net = sol.net
    out = np.zeros((len(net.buses), net.horizon))
    bi = net.bus_index
    for k, ln in enumerate(net.lines):
        out[bi[ln.to_bus]] += sol.f[k]
        out[bi[ln.from_bus]] -= sol.f[k]
    return out


def _per_bus(net: Network, items, values) -> np.ndarray:
    out = np.zeros((len(net.buses), net.horizon))
    for k, item in enumerate(items):
        out[net.bus_index[item.bus]] += values[k]
    return out


def supply_arrays(inputs: DispatchInputs):
    net = inputs.net
    T = net.horizon
    M = np.array([x.supply for x in net.imports], dtype=float).reshape(len(net.imports), T)
    R = np.array([x.supply for x in net.renewables], dtype=float).reshape(len(net.renewables), T)
    D = net.demand_matrix()
    return D, M, inputs.wind, R


def model_residuals(sol: DispatchSolution) -> dict[str, float]:
    """Largest absolute violation of each model identity."""
    net = sol.net
    D, M, W, R = supply_arrays(sol.inputs)
    lhs = (net_injection(sol) + _per_bus(net, net.generators, sol.p) + _per_bus(net, net.imports, M - sol.m)
           + _per_bus(net, net.wind_farms, W - sol.w) + _per_bus(net, net.renewables, R - sol.r) - sol.u)
    rhs = _per_bus(net, net.loads, D - sol.d)
    out = {"balance": float(np.abs(lhs - rhs).max(initial=0.0))}

    bi = net.bus_index
    flow_res = 0.0
    for k, ln in enumerate(net.lines):
        law = ln.susceptance * (sol.theta[bi[ln.to_bus]] - sol.theta[bi[ln.from_bus]])
        flow_res = max(flow_res, float(np.abs(sol.f[k] - law).max(initial=0.0)))
    out["flow"] = flow_res

    ramp_res = 0.0
    for k, g in enumerate(net.generators):
        prev = np.concatenate([[g.p_initial], sol.p[k, :-1]])
        delta = sol.p[k] - prev
        ramp_res = max(ramp_res, float(np.maximum(delta - g.ramp_up, -g.ramp_down - delta).max(initial=0.0)))
    out["ramp"] = max(ramp_res, 0.0)

    def box(v, lo, hi):
        return float(np.maximum(np.maximum(lo - v, v - hi), 0.0).max(initial=0.0))

    bounds = [
        box(sol.p, 0.0, np.array([[g.p_max] for g in net.generators]).reshape(-1, 1) if net.generators else 0.0),
        box(sol.d, 0.0, D),
        box(sol.m, 0.0, M),
        box(sol.w, 0.0, W),
        box(sol.r, 0.0, R),
        box(sol.f, -np.array([ln.flow_max for ln in net.lines]).reshape(-1, 1),
            np.array([ln.flow_max for ln in net.lines]).reshape(-1, 1)) if net.lines else 0.0,
        box(sol.theta, np.array([b.theta_min for b in net.buses]).reshape(-1, 1),
            np.array([b.theta_max for b in net.buses]).reshape(-1, 1)),
    ]
    x = sol.inputs.placement
    cap = (sol.inputs.capacity * x).reshape(-1, 1) if x is not None else 0.0
    bounds.append(box(sol.u, 0.0, cap))
    out["bounds"] = max(bounds)
    return out


def dispatch_cost(sol: DispatchSolution) -> float:
    """Total dispatch cost recomputed from the primal values ($)."""
    net = sol.net
    h = net.period_hours

    def term(items, attr, values):
        if not items:
            return 0.0
        c = np.array([getattr(x, attr) for x in items])
        return float(c @ values.sum(axis=1))

    total = (term(net.generators, "cost", sol.p) + term(net.loads, "shed_cost", sol.d)
             + term(net.imports, "spill_cost", sol.m) + term(net.wind_farms, "spill_cost", sol.w)
             + term(net.renewables, "spill_cost", sol.r))
    return total * h
