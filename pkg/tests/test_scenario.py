import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stranded_grid.fixtures import data_path, one_bus
from stranded_grid.metrics import wind_penetration
from stranded_grid.network import load_network
from stranded_grid.scenario import (DAY_TYPES, DayType, ScenarioError, ScenarioSet, WindScenario,
                                    expected_wind_energy, load_scenarios, normalize_probabilities,
                                    scale_to_penetration, scenarios_to_csv)


@pytest.fixture
def net2():
    doc = one_bus()
    doc["horizon"] = 2
    doc["loads"][0]["demand"] = [50.0, 50.0]
    doc["wind_farms"] = [{"id": "w1", "bus": "b1", "spill_cost": 100.0}]
    return load_network(doc)


def make_set(weights, values=None, farm="w1", T=2):
    values = values or [[1.0] * T] * len(weights)
    return ScenarioSet(tuple(WindScenario(str(k), w, {farm: tuple(v)}) for k, (w, v) in enumerate(zip(weights, values))))


def test_eight_day_types():
    assert len(DAY_TYPES) == 8 == len({d.name for d in DAY_TYPES})
    assert DayType.parse("WinterWE") == DayType("Winter", "WE")
    with pytest.raises(ValueError):
        DayType("Monsoon", "WD")


def test_load_two_scenarios(net2):
    text = "scenario_id,farm_id,period,mw,weight\n" + "".join(
        f"{s},w1,{t},{10 * s + t},1\n" for s in (1, 2) for t in (0, 1))
    sset = load_scenarios(text, net2)
    assert len(sset) == 2
    assert sset.scenarios[1].trajectories["w1"] == (20.0, 21.0)
    np.testing.assert_allclose(sset.probabilities, [0.5, 0.5])


@pytest.mark.parametrize("rows, match", [
    ("1,w9,0,1,1\n1,w9,1,1,1\n", "unknown wind farm 'w9'"),
    ("1,w1,0,1,1\n", "1 periods, expected 2"),
    ("1,w1,0,-1,1\n1,w1,1,1,1\n", "negative"),
    ("1,w1,0,1,1\n1,w1,1,1,2\n", "weight"),
    ("1,w1,0,1,1\n1,w1,0,1,1\n", "duplicate period"),
    ("1,w1,5,1,1\n", "period 5 outside"),
    ("", "no scenario rows"),
])
def test_load_errors(net2, rows, match):
    with pytest.raises(ScenarioError, match=match):
        load_scenarios("scenario_id,farm_id,period,mw,weight\n" + rows, net2)


def test_bad_header(net2):
    with pytest.raises(ScenarioError, match="header"):
        load_scenarios("id,farm,t,mw,w\n1,w1,0,1,1\n", net2)


def test_fixture_file_uniform(demo5, spring):
    assert len(spring) == 10
    np.testing.assert_allclose(spring.probabilities, 0.1, rtol=0, atol=1e-15)
    assert spring.farm_ids == ("w1", "w5")


def test_numeric_id_ordering(net2):
    text = "scenario_id,farm_id,period,mw,weight\n" + "".join(
        f"{s},w1,{t},1,1\n" for s in (10, 9, 2) for t in (0, 1))
    assert load_scenarios(text, net2).ids == ["2", "9", "10"]


def test_normalize_ratios():
    out = normalize_probabilities(make_set([1, 1, 2]))
    np.testing.assert_allclose(out.probabilities, [0.25, 0.25, 0.5])


def test_normalize_thousand():
    out = normalize_probabilities(make_set([0.001] * 1000))
    np.testing.assert_allclose(out.probabilities, 0.001)
    assert abs(out.probabilities.sum() - 1) <= 1e-9


def test_normalize_zero_weights():
    with pytest.raises(ScenarioError):
        normalize_probabilities(make_set([0, 0]))


def test_mismatched_farms():
    a = WindScenario("a", 1.0, {"w1": (1.0,)})
    b = WindScenario("b", 1.0, {"w2": (1.0,)})
    with pytest.raises(ScenarioError):
        ScenarioSet((a, b))


def test_scale_arithmetic():
    # D = 1000 MWh, expected W = 300 MWh, level 0.15 -> k = 0.5
    doc = one_bus()
    doc["horizon"] = 2
    doc["loads"][0]["demand"] = [500.0, 500.0]
    doc["wind_farms"] = [{"id": "w1", "bus": "b1", "spill_cost": 100.0}]
    net = load_network(doc)
    sset = normalize_probabilities(make_set([1, 1], [[100.0, 100.0], [200.0, 200.0]]))
    assert expected_wind_energy(sset) == pytest.approx(300.0)
    out = scale_to_penetration(sset, net, 0.15)
    assert out.scenarios[0].trajectories["w1"] == (50.0, 50.0)
    assert expected_wind_energy(out) == pytest.approx(150.0)


def test_scale_zero_level(spring, demo5):
    out = scale_to_penetration(spring, demo5, 0.0)
    assert not out.cube().any()


def test_scale_zero_baseline(net2):
    sset = normalize_probabilities(make_set([1], [[0.0, 0.0]]))
    with pytest.raises(ScenarioError):
        scale_to_penetration(sset, net2, 0.1)
    with pytest.raises(ScenarioError):
        scale_to_penetration(sset, net2, -0.1)


def test_fixture_scaled_to_thirty_percent(spring, demo5):
    day = demo5.for_day("SpringWD")
    out = scale_to_penetration(spring, day, 0.30)
    assert wind_penetration(out, day) == pytest.approx(30.0, abs=1e-9)
    np.testing.assert_array_equal(out.probabilities, spring.probabilities)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 2), st.lists(st.floats(0.1, 400), min_size=4, max_size=4),
       st.lists(st.integers(1, 5), min_size=2, max_size=2))
def test_scaling_is_closed_under_penetration(level, values, weights):
    doc = one_bus()
    doc["horizon"] = 2
    doc["loads"][0]["demand"] = [120.0, 80.0]
    doc["wind_farms"] = [{"id": "w1", "bus": "b1", "spill_cost": 100.0}]
    net = load_network(doc)
    sset = normalize_probabilities(make_set(weights, [values[:2], values[2:]]))
    out = scale_to_penetration(sset, net, level)
    assert wind_penetration(out, net) == pytest.approx(100 * level, rel=1e-9, abs=1e-9)
    np.testing.assert_array_equal(out.probabilities, sset.probabilities)


def test_partial_farm_scaling(spring, demo5):
    out = scale_to_penetration(spring, demo5, 0.2, farms=["w5"])
    assert out.cube(["w1"]).tolist() == spring.cube(["w1"]).tolist()
    assert wind_penetration(out, demo5, farms=["w5"]) == pytest.approx(20.0, abs=1e-9)


@pytest.mark.parametrize("name, net_name", [("demo5_Fall.csv", "demo5.json"), ("tiny4.csv", "tiny4.json")])
def test_csv_round_trip(name, net_name):
    net = load_network(data_path(net_name))
    sset = load_scenarios(data_path(name), net)
    assert load_scenarios(scenarios_to_csv(sset), net) == sset


def test_with_farms(spring):
    extra = {"x": [[1.0] * 24 for _ in range(len(spring))]}
    out = spring.with_farms(extra)
    assert out.farm_ids == ("w1", "w5", "x")
    with pytest.raises(ScenarioError):
        out.with_farms(extra)


def test_deterministic_set(demo5):
    sset = ScenarioSet.deterministic(demo5)
    assert len(sset) == 1 and sset.probabilities.tolist() == [1.0]
    assert sset.scenarios[0].trajectories["w1"] == demo5.wind_farms[0].trajectory
