import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kweak.barrier import strip_half_width
from kweak.field import generate_field, lifetime_upper_bound
from kweak.geometry import Point
from kweak.grids import Grid, effective_granularity, shift_family
from kweak.scheduling import (activate_nonpreemptive, activate_nonuniform, activate_uniform,
                              grid_based_lifetime, load_schedule)
from conftest import make_field

CHAIN = [[0.5, 2], [2.2, 2], [3.9, 2], [5.5, 2]]


def one_line_family():
    return [Grid("square", np.array([[0.0, 2.0, 6.0, 2.0]]), Point(0, 0), 4.0, 6.0, ["h"])]


def test_uniform_half_load():
    f = make_field(CHAIN, L=6)
    e = activate_uniform(f, [0, 1, 2, 3], 2)
    assert e.delta == 0.5 and np.allclose(f.battery, 0.5)
    activate_uniform(f, [0, 1], 2)
    assert np.allclose(f.battery, [0, 0, 0.5, 0.5])
    with pytest.raises(ValueError):
        activate_uniform(f, [0, 2], 2)


def test_uniform_single_use():
    f = make_field(CHAIN, L=6)
    assert activate_uniform(f, [0, 1], 1).delta == 1.0
    assert np.allclose(f.battery, [0, 0, 1, 1])
    with pytest.raises(ValueError):
        activate_uniform(f, [2], 0)


def test_nonuniform_formula():
    f = make_field(CHAIN, L=6, battery=[0.8, 1, 1, 1])
    assert activate_nonuniform(f, [0, 1], 0.5).delta == pytest.approx(0.4)
    with pytest.raises(ValueError):
        activate_nonuniform(f, [0], 1.5)


def test_nonuniform_full_decay_depletes_weakest():
    f = make_field(CHAIN, L=6, battery=[0.3, 1, 1, 1])
    activate_nonuniform(f, [0, 1, 2], 1.0)
    assert f.battery[0] == 0.0 and f.battery[1] == pytest.approx(0.7)
    with pytest.raises(ValueError):
        activate_nonuniform(f, [0, 3], 1.0)


def test_nonuniform_hand_ledger():
    f = make_field(CHAIN, L=6, battery=[1, 0.8, 0.6, 1])
    steps = [([0, 1], 1.0, 0.8, [0.2, 0, 0.6, 1]),
             ([2, 3], 0.5, 0.3, [0.2, 0, 0.3, 0.7]),
             ([0, 2, 3], 1.0, 0.2, [0, 0, 0.1, 0.5])]
    for ids, d, delta, after in steps:
        assert activate_nonuniform(f, ids, d).delta == pytest.approx(delta)
        assert np.allclose(f.battery, after)


def test_nonpreemptive():
    f = make_field(CHAIN, L=6)
    assert activate_nonpreemptive(f, [0, 1]).delta == 1.0
    assert activate_nonpreemptive(f, [2, 3]).delta == 1.0
    g = make_field(CHAIN, L=6, battery=[1, 0.5, 1, 1])
    with pytest.raises(ValueError):
        activate_nonpreemptive(g, [0, 1])
    with pytest.raises(ValueError):
        activate_nonpreemptive(make_field(CHAIN, L=6, battery=[0.5] * 4), [0, 1])


def test_two_disjoint_covers_nonpreemptive_lifetime_two():
    pts = CHAIN + [[0.5, 2.3], [2.2, 2.3], [3.9, 2.3], [5.5, 2.3]]
    res = grid_based_lifetime(make_field(pts, L=6), one_line_family(), "bfs", "nonpreemptive")
    assert res.lifetime == 2.0 and len(res) == 2


@pytest.mark.parametrize("alg", ["bfs", "minmax"])
@pytest.mark.parametrize("policy,n", [("nonuniform", 1), ("uniform", 2), ("nonpreemptive", 1)])
def test_single_grid_single_cover(alg, policy, n):
    f = make_field(CHAIN, L=6)
    res = grid_based_lifetime(f, one_line_family(), alg, policy, {"m": 2})
    assert res.lifetime == pytest.approx(1.0) and len(res) == n
    assert np.all(f.battery == 1.0)          # caller's field untouched
    assert np.allclose(res.final_battery, 0.0)


def test_lp_single_grid_needs_both_orientations():
    f = make_field(CHAIN, L=6)
    assert grid_based_lifetime(f, one_line_family(), "lp", "nonuniform").lifetime == 0.0
    with pytest.raises(ValueError):
        grid_based_lifetime(f, one_line_family(), "lp", "uniform")


def test_unknown_names_rejected():
    f = make_field(CHAIN, L=6)
    with pytest.raises(ValueError):
        grid_based_lifetime(f, one_line_family(), "dfs", "uniform")
    with pytest.raises(ValueError):
        grid_based_lifetime(f, one_line_family(), "bfs", "greedy")


def _usage(res, n):
    used = np.zeros(n)
    for e in res.entries:
        used[list(e.cover.sensor_ids)] += e.delta
    return used


@settings(max_examples=12)
@given(st.integers(0, 10**6), st.sampled_from(["bfs", "minmax", "lp"]),
       st.sampled_from(["uniform", "nonuniform", "nonpreemptive"]), st.sampled_from([0.0, 0.2]),
       st.sampled_from(["square", "hexagonal"]))
def test_loop_invariants(seed, alg, policy, eps, kind):
    if alg == "lp" and (policy != "nonuniform" or kind != "square"):
        return
    kappa = 8.0
    f = generate_field(12, 2.5, seed)
    w = strip_half_width(eps, kappa)
    fam = shift_family(kind, 12, kappa, effective_granularity(2.0, w))
    res = grid_based_lifetime(f, fam, alg, policy, {"m": 2, "d": 1.0}, strip_half_width=w, epsilon=eps)
    assert all(e.delta > 0 for e in res.entries)
    assert np.all(res.final_battery >= -1e-9)
    assert np.all(_usage(res, f.n) <= 1 + 1e-9)
    assert np.allclose(res.final_battery, f.battery - _usage(res, f.n), atol=1e-9)
    assert res.lifetime <= lifetime_upper_bound(f, kappa) + 1e-9
    assert sum(v["time"] for v in res.per_grid.values()) == pytest.approx(res.lifetime)


def test_schedule_csv_round_trip(tmp_path):
    f = generate_field(12, 2.5, 7)
    fam = shift_family("square", 12, 8.0, 2.0)
    res = grid_based_lifetime(f, fam, "minmax", "uniform", {"m": 2})
    assert len(res) > 0
    path = tmp_path / "s.csv"
    res.save(path)
    back = load_schedule(path)
    assert [e.cover.sensor_ids for e in back.entries] == [e.cover.sensor_ids for e in res.entries]
    assert [e.delta for e in back.entries] == pytest.approx([e.delta for e in res.entries])
    assert back.to_csv() == res.to_csv()
    with pytest.raises(ValueError):
        load_schedule("a,b\n1,2\n")
