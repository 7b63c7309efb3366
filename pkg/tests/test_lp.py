import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stranded_grid.lp import (BACKENDS, INF, TOLERANCES, LpBuilder, LpStatus, MipError, MixedIntegerProgram,
                              certify, solve_lp, solve_mip)
from stranded_grid.lp.model import LinearProgram


def single(lo=-INF, hi=INF, cost=1.0, row=None, lb=0.0, ub=INF):
    b = LpBuilder()
    x = b.add_var("x", lb, ub, cost)
    if row is not None:
        b.add_row("r", {x: 1.0}, *row)
    return b.build()


def random_lp(rng, m, n, box=10.0):
    """Feasible by construction: rows bracket the activity of a random point."""
    b = LpBuilder(name=f"rand{m}x{n}")
    x0 = rng.uniform(0, box, n)
    for j in range(n):
        b.add_var(f"x{j}", 0.0, box, float(rng.normal()))
    A = rng.normal(size=(m, n)) * (rng.random((m, n)) < 0.5)
    act = A @ x0
    for i in range(m):
        kind = rng.integers(3)
        lo = act[i] - rng.uniform(0, 2) if kind != 1 else -INF
        hi = act[i] + rng.uniform(0, 2) if kind != 0 else INF
        b.add_row(f"r{i}", {j: float(A[i, j]) for j in range(n) if A[i, j] != 0}, lo, hi)
    return b.build()


def vertex_oracle(lp: LinearProgram) -> float:
    """Minimum over all basic feasible points of a bounded LP."""
    A = lp.dense()
    n = lp.num_vars
    G, h = [], []
    for i in range(lp.num_rows):
        if np.isfinite(lp.row_hi[i]):
            G.append(A[i]), h.append(lp.row_hi[i])
        if np.isfinite(lp.row_lo[i]):
            G.append(-A[i]), h.append(-lp.row_lo[i])
    eye = np.eye(n)
    for j in range(n):
        G.append(eye[j]), h.append(lp.ub[j])
        G.append(-eye[j]), h.append(-lp.lb[j])
    G, h = np.array(G), np.array(h)
    best = math.inf
    for active in itertools.combinations(range(len(h)), n):
        sub = G[list(active)]
        if abs(np.linalg.det(sub)) < 1e-10:
            continue
        x = np.linalg.solve(sub, h[list(active)])
        if np.all(G @ x <= h + 1e-9):
            best = min(best, float(lp.cost @ x))
    return best


@pytest.mark.parametrize("backend", BACKENDS)
def test_min_x_above_three(backend):
    sol = solve_lp(single(row=(3.0, INF)), backend)
    assert sol.status is LpStatus.OPTIMAL
    assert sol.primal[0] == pytest.approx(3.0, abs=1e-9)
    assert sol.objective == pytest.approx(3.0, abs=1e-9)
    assert sol.duals[0] == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("backend", BACKENDS)
def test_max_x_below_five(backend):
    sol = solve_lp(single(cost=-1.0, row=(-INF, 5.0)), backend)
    assert sol.primal[0] == pytest.approx(5.0, abs=1e-9)
    assert sol.objective == pytest.approx(-5.0, abs=1e-9)
    assert sol.duals[0] == pytest.approx(-1.0, abs=1e-9)


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("backend", BACKENDS)
def test_vertex_enumeration_oracle(seed, backend):
    lp = random_lp(np.random.default_rng(seed), 3, 5)
    sol = solve_lp(lp, backend)
    assert sol.optimal
    assert sol.objective == pytest.approx(vertex_oracle(lp), abs=1e-8)


@pytest.mark.parametrize("seed", range(8))
def test_backends_agree_on_random_20x30(seed):
    lp = random_lp(np.random.default_rng(100 + seed), 20, 30)
    a, b = solve_lp(lp, "simplex"), solve_lp(lp, "highs")
    assert a.optimal and b.optimal
    assert a.objective == pytest.approx(b.objective, rel=1e-9, abs=1e-8)
    for sol in (a, b):
        cert = certify(lp, sol)
        assert cert.ok, cert.reason
        assert cert.primal_residual <= TOLERANCES.feasibility


@pytest.mark.parametrize("backend", BACKENDS)
def test_complementary_slackness(backend):
    lp = random_lp(np.random.default_rng(7), 12, 15)
    sol = solve_lp(lp, backend)
    act = lp.activity(sol.primal)
    for i in np.flatnonzero(np.abs(sol.duals) > 1e-7):
        gap = min(abs(act[i] - lp.row_lo[i]), abs(act[i] - lp.row_hi[i]))
        assert gap <= 1e-6
    for j in np.flatnonzero(np.abs(sol.reduced_costs) > 1e-7):
        gap = min(abs(sol.primal[j] - lp.lb[j]), abs(sol.primal[j] - lp.ub[j]))
        assert gap <= 1e-6


@pytest.mark.parametrize("backend", BACKENDS)
def test_infeasible_and_unbounded(backend):
    b = LpBuilder()
    x = b.add_var("x")
    b.add_row("lo", {x: 1.0}, 5.0, INF)
    b.add_row("hi", {x: 1.0}, -INF, 2.0)
    assert solve_lp(b.build(), backend).status is LpStatus.INFEASIBLE
    assert solve_lp(single(cost=-1.0), backend).status is LpStatus.UNBOUNDED


def test_unbounded_ray_from_reference_simplex():
    b = LpBuilder()
    x, y = b.add_var("x", cost=-1.0), b.add_var("y", cost=0.0)
    b.add_row("r", {x: 1.0, y: -1.0}, -INF, 1.0)
    sol = solve_lp(b.build(), "simplex")
    assert sol.status is LpStatus.UNBOUNDED
    ray = sol.certificate
    assert ray[0] > 0 and ray[0] - ray[1] <= 1e-12


def test_degenerate_problem_terminates():
    # many redundant constraints through one vertex
    b = LpBuilder()
    xs = [b.add_var(f"x{j}", 0, INF, -1.0) for j in range(3)]
    for k in range(12):
        w = np.random.default_rng(k).uniform(0.5, 1.5, 3)
        b.add_row(f"r{k}", {x: float(v) for x, v in zip(xs, w)}, -INF, float(w.sum()))
    a, h = solve_lp(b.build(), "simplex"), solve_lp(b.build(), "highs")
    assert a.objective == pytest.approx(h.objective, abs=1e-9)


@pytest.mark.parametrize("backend", BACKENDS)
def test_mip_rounds_up(backend):
    b = LpBuilder()
    x = b.add_var("x", 0, 10, 1.0)
    b.add_row("r", {x: 1.0}, 2.3, INF)
    res = solve_mip(MixedIntegerProgram(b.build(), (x,)), backend=backend)
    assert res.primal[x] == pytest.approx(3.0)
    assert res.objective == pytest.approx(3.0)
    assert res.gap >= 0


def knapsack(values, weights, cap):
    b = LpBuilder(name="knapsack")
    xs = [b.add_var(f"x{k}", 0, 1, -float(v)) for k, v in enumerate(values)]
    b.add_row("cap", {x: float(w) for x, w in zip(xs, weights)}, -INF, float(cap))
    return MixedIntegerProgram(b.build(), tuple(xs))


def enumerate_binary(values, weights, cap):
    best = 0.0
    for pick in itertools.product((0, 1), repeat=len(values)):
        if np.dot(pick, weights) <= cap:
            best = max(best, float(np.dot(pick, values)))
    return -best


@pytest.mark.parametrize("backend", BACKENDS)
def test_three_item_knapsack(backend):
    values, weights = (10, 13, 7), (4, 6, 3)
    res = solve_mip(knapsack(values, weights, 9), backend=backend)
    assert res.objective == pytest.approx(enumerate_binary(values, weights, 9))
    assert res.objective == pytest.approx(-20.0)


def test_integral_relaxation_matches_lp():
    b = LpBuilder()
    x, y = b.add_var("x", 0, 5, -1.0), b.add_var("y", 0, 5, -2.0)
    b.add_row("r", {x: 1.0, y: 1.0}, -INF, 4.0)
    lp = b.build()
    res = solve_mip(MixedIntegerProgram(lp, (x, y)))
    assert res.objective == pytest.approx(solve_lp(lp).objective)
    assert res.nodes == 1


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 30), st.integers(1, 15)), min_size=1, max_size=12),
       st.integers(0, 60))
def test_mip_matches_enumeration(items, cap):
    values, weights = zip(*items)
    res = solve_mip(knapsack(values, weights, cap), backend="simplex")
    assert res.objective == pytest.approx(enumerate_binary(values, weights, cap), abs=1e-6)
    x = res.primal[: len(values)]
    assert np.all(np.abs(x - np.round(x)) <= TOLERANCES.integrality)


def test_general_integer_enumeration():
    rng = np.random.default_rng(3)
    b = LpBuilder()
    xs = [b.add_var(f"x{k}", 0, 3, float(c)) for k, c in enumerate(rng.normal(size=4))]
    A = rng.uniform(0, 2, (2, 4))
    for i in range(2):
        b.add_row(f"r{i}", {x: float(a) for x, a in zip(xs, A[i])}, -INF, 4.0)
    mip = MixedIntegerProgram(b.build(), tuple(xs))
    res = solve_mip(mip)
    best = min(float(mip.lp.cost @ p) for p in itertools.product(range(4), repeat=4)
               if np.all(A @ np.array(p) <= 4.0 + 1e-12))
    assert res.objective == pytest.approx(best, abs=1e-9)


def test_mip_infeasible_raises():
    b = LpBuilder()
    x = b.add_var("x", 0, 1, 1.0)
    b.add_row("r", {x: 1.0}, 0.4, 0.6)
    with pytest.raises(MipError):
        solve_mip(MixedIntegerProgram(b.build(), (x,)))


def test_mip_budget_without_incumbent_raises():
    b = LpBuilder()
    x = b.add_var("x", 0, 10, 1.0)
    b.add_row("r", {x: 1.0}, 2.5, INF)
    with pytest.raises(MipError):
        solve_mip(MixedIntegerProgram(b.build(), (x,)), max_nodes=1)


def test_mip_budget_exhaustion_is_flagged():
    values = (10, 13, 7, 8, 9, 11, 12, 6)
    weights = (4.1, 6.3, 3.2, 3.9, 4.4, 5.2, 5.8, 2.9)
    full = solve_mip(knapsack(values, weights, 15))
    part = solve_mip(knapsack(values, weights, 15), max_nodes=full.nodes - 1)
    assert part.budget_exhausted
    assert part.objective >= full.objective - 1e-9
    assert part.best_bound <= full.objective + 1e-9


def test_mip_requires_bounded_integers():
    b = LpBuilder()
    x = b.add_var("x", 0, INF, 1.0)
    with pytest.raises(ValueError):
        MixedIntegerProgram(b.build(), (x,))


def test_linear_program_is_immutable():
    lp = single(row=(3.0, INF))
    with pytest.raises(ValueError):
        lp.cost[0] = 2.0


def test_bad_coefficient_reference():
    with pytest.raises(ValueError):
        LinearProgram(("x",), [0.0], [1.0], [1.0], ("r",), [0.0], [1.0], [0], [3], [1.0])
