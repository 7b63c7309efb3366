import numpy as np
import pytest

from stranded_grid.dispatch import (IDENTITY_TOL, DispatchError, DispatchInputs, build_ed, dispatch_cost,
                                    model_residuals, solve_ed)
from stranded_grid.fixtures import data_path, one_bus, two_bus
from stranded_grid.lp import BACKENDS
from stranded_grid.network import load_network
from stranded_grid.scenario import scale_to_penetration


def one_bus_wind(w):
    doc = one_bus()
    doc["wind_farms"] = [{"id": "w", "bus": "b1", "spill_cost": 100.0, "trajectory": [w]}]
    return load_network(doc)


def test_one_bus_structure():
    lp, idx = build_ed(DispatchInputs.make(load_network(one_bus())))
    assert lp.num_vars == 3
    assert {n.split("[")[0] for n in lp.var_names} == {"p", "d", "theta"}
    assert idx.balance.size == 1 and idx.u is None


def test_demo5_variable_count(demo5):
    lp, idx = build_ed(DispatchInputs.make(demo5))
    T = demo5.horizon
    expected = T * (len(demo5.generators) + len(demo5.loads) + len(demo5.lines) + len(demo5.buses)
                    + len(demo5.imports) + len(demo5.wind_farms) + len(demo5.renewables))
    assert lp.num_vars == expected == 24 * 21
    assert idx.balance.shape == (5, 24) and idx.flow.shape == (6, 24) and idx.ramp.shape == (3, 24)


def test_placement_adds_capped_u(demo5):
    x = np.zeros(5)
    x[0] = 1
    lp, idx = build_ed(DispatchInputs.make(demo5, placement=x, capacity=200.0))
    base, _ = build_ed(DispatchInputs.make(demo5))
    assert lp.num_vars == base.num_vars + 5 * 24
    caps = lp.row_hi[idx.cap]
    assert np.all(caps[0] == 200.0) and np.all(caps[1:] == 0.0)
    assert np.all(lp.lb[idx.u] == 0.0)


@pytest.mark.parametrize("backend", BACKENDS)
def test_one_bus_dispatch(backend):
    sol = solve_ed(DispatchInputs.make(load_network(one_bus())), backend)
    assert sol.p[0, 0] == pytest.approx(50.0)
    assert sol.d[0, 0] == pytest.approx(0.0, abs=1e-9)
    assert sol.objective == pytest.approx(500.0)
    assert dispatch_cost(sol) == pytest.approx(500.0)
    assert sol.lmp[0, 0] == pytest.approx(10.0, abs=1e-6)


@pytest.mark.parametrize("backend", BACKENDS)
def test_one_bus_with_wind(backend):
    sol = solve_ed(DispatchInputs.make(one_bus_wind(80.0)), backend)
    assert sol.w[0, 0] == pytest.approx(30.0)
    assert sol.p[0, 0] == pytest.approx(0.0, abs=1e-9)
    assert sol.objective == pytest.approx(3000.0)


@pytest.mark.parametrize("backend", BACKENDS)
def test_two_bus_congestion(backend):
    sol = solve_ed(DispatchInputs.make(load_network(two_bus())), backend)
    assert sol.f[0, 0] == pytest.approx(40.0)
    assert sol.w[0, 0] == pytest.approx(60.0)
    assert sol.p[0, 0] == pytest.approx(10.0)
    assert sol.objective == pytest.approx(6100.0)
    assert dispatch_cost(sol) == pytest.approx(6100.0)
    assert sol.lmp[0, 0] == pytest.approx(-100.0) and sol.lmp[1, 0] == pytest.approx(10.0)


def test_all_zero_system():
    doc = one_bus()
    doc["loads"][0]["demand"] = [0.0]
    sol = solve_ed(DispatchInputs.make(load_network(doc)))
    assert sol.objective == 0.0 and dispatch_cost(sol) == 0.0


def test_ramp_applies_to_first_period():
    doc = one_bus()
    doc["horizon"] = 3
    doc["loads"][0]["demand"] = [80.0, 80.0, 80.0]
    doc["generators"][0].update(ramp_up=30.0, ramp_down=30.0, p_initial=20.0)
    sol = solve_ed(DispatchInputs.make(load_network(doc)))
    np.testing.assert_allclose(sol.p[0], [50.0, 80.0, 80.0], atol=1e-9)
    assert sol.d[0, 0] == pytest.approx(30.0)


def test_uncongested_lmp_equals_marginal_cost(demo5):
    doc = one_bus()
    doc["generators"].append({"id": "g2", "bus": "b1", "cost": 25.0, "p_max": 100.0, "ramp_up": 100.0,
                              "ramp_down": 100.0})
    doc["loads"][0]["demand"] = [130.0]
    sol = solve_ed(DispatchInputs.make(load_network(doc)))
    assert sol.lmp[0, 0] == pytest.approx(25.0, abs=1e-6)


@pytest.mark.parametrize("day", ["SpringWD", "SummerWE", "WinterWD"])
def test_identities_on_fixture(demo5, spring, day):
    sset = scale_to_penetration(spring, demo5.for_day(day), 0.3)
    for s in sset.scenarios[:4]:
        sol = solve_ed(DispatchInputs.make(demo5, s, day=day))
        res = model_residuals(sol)
        assert max(res.values()) <= IDENTITY_TOL
        assert dispatch_cost(sol) == pytest.approx(sol.objective, rel=1e-6)


def test_backends_agree_on_fixture(demo5, spring):
    inputs = DispatchInputs.make(demo5, spring.scenarios[3], day="FallWE")
    a, b = solve_ed(inputs, "simplex"), solve_ed(inputs, "highs")
    assert a.objective == pytest.approx(b.objective, rel=1e-9)


def test_no_shedding_while_wind_spills_at_same_bus(demo5, spring):
    day = demo5.for_day("SummerWD")
    sset = scale_to_penetration(spring, day, 0.5)
    for s in sset.scenarios:
        sol = solve_ed(DispatchInputs.make(day, s))
        for k, farm in enumerate(day.wind_farms):
            for j, load in enumerate(day.loads):
                if load.bus == farm.bus:
                    assert not np.any((sol.w[k] > 1e-7) & (sol.d[j] > 1e-7))
        assert sol.d.sum() <= 1e-7


def test_placement_never_raises_cost(demo5, spring):
    rng = np.random.default_rng(11)
    day = demo5.for_day("SpringWE")
    sset = scale_to_penetration(spring, day, 0.3)
    for s in sset.scenarios[:3]:
        base = solve_ed(DispatchInputs.make(day, s)).objective
        for _ in range(4):
            x = rng.integers(0, 3, len(day.buses))
            sol = solve_ed(DispatchInputs.make(day, s, placement=x, capacity=25.0))
            assert sol.objective <= base + 1e-6 * (1 + abs(base))
            assert np.all(sol.u <= 25.0 * x[:, None] + 1e-8)


def test_input_validation(demo5):
    with pytest.raises(DispatchError, match="no wind trajectory"):
        DispatchInputs.make(demo5, {"w1": [1.0] * 24})
    with pytest.raises(DispatchError, match="length"):
        DispatchInputs.make(demo5, {"w1": [1.0], "w5": [1.0]})
    with pytest.raises(DispatchError, match="integers"):
        DispatchInputs.make(demo5, placement=[0.5, 0, 0, 0, 0])
    with pytest.raises(DispatchError, match="one entry per bus"):
        DispatchInputs.make(demo5, placement=[1, 0])


def test_placement_by_bus_mapping(demo5):
    inputs = DispatchInputs.make(demo5, placement={"b5": 2}, capacity=10.0)
    assert inputs.placement.tolist() == [0, 0, 0, 0, 2]


def test_tiny_fixtures_solve():
    for name in ("tiny3", "tiny4"):
        net = load_network(data_path(f"{name}.json"))
        sol = solve_ed(DispatchInputs.make(net, {w.id: [5.0] * net.horizon for w in net.wind_farms}))
        assert max(model_residuals(sol).values()) <= IDENTITY_TOL
