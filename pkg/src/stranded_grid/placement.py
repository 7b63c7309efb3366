"""Optimal placement of dispatchable loads as a two-stage stochastic
integer program.

First stage: integer counts ``x[n]`` of loads of ``U`` MW per candidate bus
with ``sum(x) <= K``. Second stage: one dispatch per wind scenario with
``u[n, t] <= U x[n]``. Two solvers are provided: the extensive form
(:func:`solve_deterministic_equivalent`) and an L-shaped method
(:func:`solve_benders`) whose optimality cuts come from the duals of the
capacity rows. The two are expected to agree and are tested against each
other.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import lp as lpcore
from .dispatch import (DispatchInputs, DispatchSolution, EdIndex, add_ed_block, build_ed,
                       extract_solution, solve_built)
from .lp import INF, LinearProgram, LpBuilder, MixedIntegerProgram
from .network import Network
from .parallel import parallel_map
from .scenario import ScenarioSet, WindScenario


class PlacementError(RuntimeError):
    pass


@dataclass(frozen=True)
class PlacementConfig:
    K: int
    U: float
    candidates: tuple[str, ...] | None = None  # None: every bus
    tol: float = 1e-6
    cut_mode: str = "single"
    max_iterations: int = 200
    max_nodes: int = 20000
    per_bus_max: int | None = None  # defaults to K
    backend: str | None = None
    master_backend: str = "simplex"

    def __post_init__(self):
        if self.K < 0 or self.K != int(self.K):
            raise ValueError("K must be a nonnegative integer")
        if not self.U >= 0:
            raise ValueError("U must be nonnegative")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.cut_mode not in ("single", "multi"):
            raise ValueError(f"cut_mode must be 'single' or 'multi', not {self.cut_mode!r}")

    def candidate_positions(self, net: Network) -> list[int]:
        if self.candidates is None:
            return list(range(len(net.buses)))
        missing = [b for b in self.candidates if b not in net.bus_index]
        if missing:
            raise PlacementError(f"candidate buses not in network: {missing}")
        return sorted(net.bus_index[b] for b in self.candidates)

    @property
    def x_upper(self) -> int:
        return self.K if self.per_bus_max is None else min(self.K, self.per_bus_max)


@dataclass(frozen=True)
class BendersCut:
    """``Q(x) >= intercept + coeffs @ x`` over the candidate counts; for a
    single aggregated cut ``scenario`` is None and Q is the expectation."""

    intercept: float
    coeffs: np.ndarray
    scenario: str | None = None
    iteration: int = 0

    def value(self, x_cand) -> float:
        return float(self.intercept + self.coeffs @ np.asarray(x_cand, dtype=float))


@dataclass
class ConvergenceRecord:
    iteration: int
    lb: float
    ub: float
    gap: float
    seconds: float
    cuts_added: int


@dataclass
class PlacementSolution:
    buses: tuple[str, ...]
    x: np.ndarray  # per bus, integer counts
    expected_cost: float
    scenario_costs: np.ndarray
    probabilities: np.ndarray
    method: str
    gap: float = 0.0
    log: list[ConvergenceRecord] = field(default_factory=list)
    cuts: list[BendersCut] = field(default_factory=list)
    solutions: list[DispatchSolution] | None = None
    budget_exhausted: bool = False
    objective: float = math.nan  # solver's own objective value

    def as_dict(self) -> dict[str, int]:
        return {b: int(v) for b, v in zip(self.buses, self.x)}


# ------------------------------------------------------------------ recourse

class RecourseOracle:
    """Second-stage dispatch LP for one scenario, built once and re-solved
    with the capacity right-hand sides set from the trial placement."""

    def __init__(self, net: Network, scenario: WindScenario, U: float, day: str | None = None,
                 backend: str | None = None):
        self.inputs = DispatchInputs.make(net, scenario, day=day, placement=np.zeros(len(net.for_day(day).buses)),
                                          capacity=U)
        self.lp, self.idx = build_ed(self.inputs, with_u=True)
        self.U = float(U)
        self.backend = backend
        self.scenario_id = scenario.id

    def solve(self, x) -> DispatchSolution:
        x = np.asarray(x, dtype=float)
        T = self.inputs.net.horizon
        rows = self.idx.cap.ravel()
        hi = np.repeat(self.U * x, T)
        lp = self.lp.with_row_bounds(rows, hi=hi)
        inputs = self.inputs.with_placement(x, self.U)
        return solve_built(inputs, lp, self.idx, backend=self.backend)

    def __call__(self, x) -> tuple[float, np.ndarray]:
        """Q(x) and its subgradient with respect to x (per bus)."""
        sol = self.solve(x)
        grad = self.U * sol.cap_duals.sum(axis=1)
        return sol.objective, grad


def recourse(x, scenario: WindScenario, net: Network, day: str | None = None, U: float = 0.0,
             backend: str | None = None) -> tuple[float, np.ndarray]:
    """Q(x, scenario) and the capacity-row duals mu[n, t] ($/MW per period)."""
    sol = RecourseOracle(net, scenario, U, day, backend).solve(x)
    return sol.objective, sol.cap_duals


# --------------------------------------------------------- extensive form

@dataclass(frozen=True)
class ExtensiveIndex:
    x: dict[int, int]  # bus position -> variable
    budget: int
    blocks: dict[str, EdIndex]


def build_deterministic_equivalent(net: Network, sset: ScenarioSet, cfg: PlacementConfig,
                                   day: str | None = None) -> tuple[MixedIntegerProgram, ExtensiveIndex]:
    if len(sset) < 1:
        raise PlacementError("need at least one scenario")
    dnet = net.for_day(day)
    b = LpBuilder(name=f"extensive:{dnet.name}")
    cands = cfg.candidate_positions(dnet)
    xv = {n: b.add_var(f"x[{dnet.buses[n].id}]", 0.0, float(cfg.x_upper)) for n in cands}
    budget = b.add_row("budget", {j: 1.0 for j in xv.values()}, -INF, float(cfg.K))
    blocks = {}
    for s in sset.scenarios:
        inputs = DispatchInputs.make(dnet, s, capacity=cfg.U)
        blocks[s.id] = add_ed_block(b, inputs, tag=f"@{s.id}", cost_weight=s.probability,
                                    with_u=True, x_vars=xv)
    lp = b.build()
    return MixedIntegerProgram(lp, tuple(sorted(xv.values()))), ExtensiveIndex(xv, budget, blocks)


def solve_deterministic_equivalent(net: Network, sset: ScenarioSet, cfg: PlacementConfig,
                                   day: str | None = None, keep_solutions: bool = False) -> PlacementSolution:
    mip, index = build_deterministic_equivalent(net, sset, cfg, day)
    res = lpcore.solve_mip(mip, gap_tol=min(cfg.tol, 1e-9), backend=cfg.backend, max_nodes=cfg.max_nodes)
    dnet = net.for_day(day)
    x = np.zeros(len(dnet.buses))
    for n, j in index.x.items():
        x[n] = round(res.primal[j])
    costs = []
    sols = []
    for s in sset.scenarios:
        inputs = DispatchInputs.make(dnet, s, placement=x, capacity=cfg.U)
        blk = index.blocks[s.id]
        sol = extract_solution(inputs, blk, res.primal, None, 0.0)
        sol.objective = _block_cost(res.primal, mip.lp, blk) / s.probability if s.probability > 0 else 0.0
        costs.append(sol.objective)
        sols.append(sol)
    probs = sset.probabilities
    return PlacementSolution(tuple(b.id for b in dnet.buses), x, float(probs @ np.array(costs)),
                             np.array(costs), probs, "detequiv", gap=res.gap,
                             solutions=sols if keep_solutions else None,
                             budget_exhausted=res.budget_exhausted, objective=res.objective)


def _block_cost(primal, lp: LinearProgram, blk: EdIndex) -> float:
    idx = np.concatenate([a.ravel() for a in (blk.p, blk.d, blk.m, blk.w, blk.r)])
    return float(lp.cost[idx] @ primal[idx])


# ------------------------------------------------------------------ Benders

class _Master:
    def __init__(self, cands: list[int], bus_ids, cfg: PlacementConfig, probs: np.ndarray):
        b = LpBuilder(name="benders-master")
        self.x = [b.add_var(f"x[{bus_ids[n]}]", 0.0, float(cfg.x_upper)) for n in cands]
        if cfg.cut_mode == "single":
            self.eta = [b.add_var("eta", 0.0, INF, 1.0)]
        else:
            self.eta = [b.add_var(f"eta[{k}]", 0.0, INF, float(p)) for k, p in enumerate(probs)]
        b.add_row("budget", {j: 1.0 for j in self.x}, -INF, float(cfg.K))
        self.lp = b.build()
        self.cfg = cfg

    def add_cut(self, cut: BendersCut, eta_pos: int, name: str):
        # eta - coeffs.x >= intercept
        row = {self.eta[eta_pos]: 1.0}
        for j, c in zip(self.x, cut.coeffs):
            if c != 0.0:
                row[j] = -float(c)
        self.lp = self.lp.with_rows([name], [row], [cut.intercept], [INF])

    def solve(self, gap_tol: float):
        mip = MixedIntegerProgram(self.lp, tuple(self.x))
        res = lpcore.solve_mip(mip, gap_tol=gap_tol, backend=self.cfg.master_backend,
                               max_nodes=self.cfg.max_nodes)
        x = np.round(res.primal[self.x])
        return x, res


def solve_benders(net: Network, sset: ScenarioSet, cfg: PlacementConfig, day: str | None = None,
                  threads: int | None = None, keep_solutions: bool = False) -> PlacementSolution:
    dnet = net.for_day(day)
    bus_ids = [b.id for b in dnet.buses]
    cands = cfg.candidate_positions(dnet)
    scenarios = list(sset.scenarios)
    probs = sset.probabilities
    oracles = parallel_map(lambda s: RecourseOracle(dnet, s, cfg.U, None, cfg.backend), scenarios, threads)
    master = _Master(cands, bus_ids, cfg, probs)

    def full(xc):
        x = np.zeros(len(bus_ids))
        x[cands] = xc
        return x

    start = time.perf_counter()
    lb, ub = -math.inf, math.inf
    best_x = None
    best_costs = None
    log: list[ConvergenceRecord] = []
    cuts: list[BendersCut] = []
    seen: dict[tuple, float] = {}
    exhausted = True
    master_gap = min(cfg.tol, 1e-9)

    for it in range(1, cfg.max_iterations + 1):
        xc, mres = master.solve(master_gap)
        lb = max(lb, mres.best_bound)
        key = tuple(int(v) for v in xc)
        added = 0
        if key not in seen:
            results = parallel_map(lambda o: o(full(xc)), oracles, threads)
            q = np.array([r[0] for r in results])
            grads = np.array([r[1][cands] for r in results])
            expected = float(probs @ q)
            seen[key] = expected
            if expected < ub:
                ub, best_x, best_costs = expected, xc.copy(), q
            if cfg.cut_mode == "single":
                g = probs @ grads
                cut = BendersCut(expected - float(g @ xc), g, None, it)
                master.add_cut(cut, 0, f"cut[{it}]")
                cuts.append(cut)
                added = 1
            else:
                for k, s in enumerate(scenarios):
                    cut = BendersCut(float(q[k] - grads[k] @ xc), grads[k], s.id, it)
                    master.add_cut(cut, k, f"cut[{it},{s.id}]")
                    cuts.append(cut)
                    added += 1
        gap = max(0.0, (ub - lb) / max(1.0, abs(ub)))
        log.append(ConvergenceRecord(it, lb, ub, gap, time.perf_counter() - start, added))
        if gap <= cfg.tol:
            exhausted = False
            break
        if added == 0:
            # master re-proposed an evaluated point: its bound already meets
            # that point's cost up to the master tolerance
            exhausted = False
            break

    if best_x is None:
        raise PlacementError("Benders budget exhausted without an incumbent")
    x = full(best_x)
    sols = None
    if keep_solutions:
        sols = parallel_map(lambda o: o.solve(x), oracles, threads)
    return PlacementSolution(tuple(bus_ids), x, ub, best_costs, probs, "benders", gap=log[-1].gap,
                             log=log, cuts=cuts, solutions=sols, budget_exhausted=exhausted, objective=ub)


def evaluate_placement(x, net: Network, sset: ScenarioSet, U: float, day: str | None = None,
                       threads: int | None = None, backend: str | None = None,
                       penetration_farms: Sequence[str] | None = None):
    """Expected cost of a fixed placement and per-scenario metric reports."""
    from .metrics import metric_report

    dnet = net.for_day(day)
    if isinstance(x, dict):
        xv = np.zeros(len(dnet.buses))
        for bus, c in x.items():
            xv[dnet.bus_index[bus]] = c
        x = xv
    x = np.asarray(x, dtype=float)

    def run(s):
        inputs = DispatchInputs.make(dnet, s, placement=x, capacity=U)
        lp, idx = build_ed(inputs, with_u=True)
        return solve_built(inputs, lp, idx, backend=backend)

    sols = parallel_map(run, sset.scenarios, threads)
    reports = [metric_report(s, penetration_farms) for s in sols]
    costs = np.array([s.objective for s in sols])
    return float(sset.probabilities @ costs), reports, sols


def solve_placement(net: Network, sset: ScenarioSet, cfg: PlacementConfig, method: str = "benders",
                    day: str | None = None, threads: int | None = None) -> PlacementSolution:
    if method == "benders":
        return solve_benders(net, sset, cfg, day=day, threads=threads)
    if method == "detequiv":
        return solve_deterministic_equivalent(net, sset, cfg, day=day)
    raise ValueError(f"unknown placement method {method!r}")
