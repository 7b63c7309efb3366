import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stranded_grid.dispatch import DispatchInputs, solve_ed
from stranded_grid.fixtures import one_bus, two_bus
from stranded_grid.metrics import (MetricReport, achieved_capacity, check_identities, ensemble_stats,
                                   metric_report, rps, split_by_lmp, spillage, stranded_power, total_dispatched,
                                   weighted_mean_std)
from stranded_grid.network import load_network
from stranded_grid.scenario import scale_to_penetration


def solve_doc(doc):
    return solve_ed(DispatchInputs.make(load_network(doc)))


def wind_only(w, spill_cost, demand=0.0):
    doc = one_bus()
    doc["generators"] = []
    doc["loads"][0]["demand"] = [demand]
    doc["wind_farms"] = [{"id": "w", "bus": "b1", "spill_cost": spill_cost, "trajectory": [w]}]
    return doc


def test_one_bus_dispatched_all_positive():
    sol = solve_doc(one_bus())
    assert total_dispatched(sol) == pytest.approx(50.0)
    assert split_by_lmp(sol) == pytest.approx((50.0, 0.0))
    assert stranded_power(sol) == pytest.approx(0.0)


def test_two_bus_buckets():
    sol = solve_doc(two_bus())
    assert total_dispatched(sol) == pytest.approx(50.0)
    pos, nonpos = split_by_lmp(sol)
    # bus 1 prices at -100: its 40 MW of absorbed wind is stranded
    assert (pos, nonpos) == pytest.approx((10.0, 40.0))
    assert stranded_power(sol) == pytest.approx(60.0 + 40.0)


def test_all_supply_spilled():
    sol = solve_doc(wind_only(30.0, 100.0))
    assert total_dispatched(sol) == pytest.approx(0.0, abs=1e-9)
    assert spillage(sol)["wind"] == pytest.approx(30.0)


def test_zero_lmp_is_nonpositive_bucket():
    sol = solve_doc(wind_only(80.0, 0.0, demand=50.0))
    assert sol.lmp[0, 0] == pytest.approx(0.0, abs=1e-12)
    pos, nonpos = split_by_lmp(sol)
    assert pos == 0.0 and nonpos == pytest.approx(50.0)


def test_stranded_definition():
    doc = two_bus()
    doc["wind_farms"][0]["trajectory"] = [45.0]
    sol = solve_doc(doc)
    _, nonpos = split_by_lmp(sol)
    assert stranded_power(sol) == pytest.approx(nonpos + sum(spillage(sol).values()))
    assert stranded_power(sol) == pytest.approx(45.0)  # spill 5 + 40 at a -100 LMP


def test_missing_duals():
    sol = solve_doc(one_bus())
    sol.lmp = np.full_like(sol.lmp, np.nan)
    with pytest.raises(ValueError):
        split_by_lmp(sol)


def test_rps_arithmetic():
    doc = one_bus()
    doc["loads"][0]["demand"] = [100.0]
    doc["renewables"] = [{"id": "r", "bus": "b1", "supply": [20.0], "spill_cost": 2000.0}]
    doc["wind_farms"] = [{"id": "w", "bus": "b1", "spill_cost": 100.0, "trajectory": [30.0]}]
    assert rps(solve_doc(doc)) == pytest.approx(50.0)


def test_rps_zero_without_renewables():
    assert rps(solve_doc(one_bus())) == 0.0


def test_rps_counts_original_demand():
    doc = one_bus()
    doc["loads"][0]["demand"] = [300.0]  # generator covers 100, 180 shed
    doc["wind_farms"] = [{"id": "w", "bus": "b1", "spill_cost": 100.0, "trajectory": [20.0]}]
    sol = solve_doc(doc)
    assert sol.d.sum() == pytest.approx(180.0)
    assert rps(sol) == pytest.approx(100 * 20 / 300)


def test_rps_increases_with_wind(demo5, spring):
    day = demo5.for_day("SpringWD")
    means = []
    for level in (0.0, 0.05, 0.15, 0.3, 0.5):
        sset = scale_to_penetration(spring, day, level)
        vals = [rps(solve_ed(DispatchInputs.make(day, s))) for s in sset.scenarios]
        means.append(float(sset.probabilities @ vals))
    assert all(b > a for a, b in zip(means, means[1:]))


def test_report_identities_on_fixture(demo5, spring):
    day = demo5.for_day("FallWD")
    sset = scale_to_penetration(spring, day, 0.5)
    for s in sset.scenarios:
        rep = metric_report(solve_ed(DispatchInputs.make(day, s, placement={"b5": 1}, capacity=20.0)))
        assert check_identities(rep) == []
        assert 0 <= rep.rps <= 100
        assert rep.wind_absorbed_pos_lmp + rep.wind_absorbed_nonpos_lmp <= rep.dispatched_total + 1e-9


def test_check_identities_flags_violation():
    rep = metric_report(solve_doc(two_bus()))
    bad = MetricReport(**{**rep.as_dict(), "stranded": rep.stranded + 1.0})
    assert check_identities(bad) == ["stranded != nonpos + spillage"]


def test_achieved_capacity_example():
    u = np.array([[10.0], [0.0], [5.0], [0.0]])
    ach = achieved_capacity([u], 4, capacity=10.0)
    assert ach.count[0, 0] == 0.5
    assert ach.energy[0] == pytest.approx(15.0 / 40.0)


def test_achieved_capacity_zero_and_threshold():
    u = np.array([[0.0, 1e-7], [0.0, 0.0]])
    ach = achieved_capacity([u], 2, capacity=1.0)
    assert ach.count_mean == 0.0
    with pytest.raises(ValueError):
        achieved_capacity([u], 0)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.lists(st.floats(0, 50), min_size=6, max_size=6))
def test_achieved_capacity_in_unit_interval(K, values):
    # at most K buses can host a load, so the count cannot exceed K
    u = np.array(values[:K] + [0.0] * (6 - K)).reshape(6, 1)
    ach = achieved_capacity([u, u * 0.5], K, capacity=50.0)
    assert 0.0 <= ach.count.min() and ach.count.max() <= 1.0
    assert 0.0 <= ach.energy.min() and ach.energy.max() <= 1.0


def fake(cost):
    return MetricReport(*([cost] + [0.0] * (len(MetricReport.field_names()) - 1)))


@pytest.mark.parametrize("costs, mean, std", [((1, 1, 1), 1.0, 0.0), ((0, 2), 1.0, 1.0)])
def test_ensemble_examples(costs, mean, std):
    stats = ensemble_stats([fake(c) for c in costs], [1.0] * len(costs))
    assert stats.mean_cost == mean and stats.std_cost == std


def test_ensemble_matches_direct_formula(demo5, spring):
    day = demo5.for_day("WinterWD")
    sset = scale_to_penetration(spring, day, 0.3)
    reps = [metric_report(solve_ed(DispatchInputs.make(day, s))) for s in sset.scenarios]
    p = sset.probabilities
    costs = np.array([r.cost for r in reps])
    mean = sum(pi * c for pi, c in zip(p, costs))
    std = math.sqrt(sum(pi * (c - mean) ** 2 for pi, c in zip(p, costs)))
    stats = ensemble_stats(reps, p)
    assert abs(stats.mean_cost - mean) <= 1e-12 * abs(mean)
    assert abs(stats.std_cost - std) <= 1e-12 * abs(mean)
    assert stats.means["thermal"] == pytest.approx(float(p @ [r.thermal for r in reps]), rel=1e-12)


def test_single_scenario_stats_exact():
    rep = metric_report(solve_doc(two_bus()))
    stats = ensemble_stats([rep], [1.0])
    assert stats.means == rep.as_dict() and stats.std_cost == 0.0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=8), st.data())
def test_weighted_std_nonnegative(values, data):
    w = data.draw(st.lists(st.floats(0.01, 10), min_size=len(values), max_size=len(values)))
    mean, std = weighted_mean_std(values, w)
    assert std >= 0
    assert min(values) - 1e-6 <= mean <= max(values) + 1e-6
