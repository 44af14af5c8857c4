import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kweak.barrier import is_grid_cover
from kweak.field import generate_field
from kweak.flow import (build_flow_network, decompose_paths, flow_covers, max_flow_oracle, to_standard_lp)
from kweak.geometry import Point
from kweak.grids import Grid, square_grid
from kweak.lp import residuals, solve_lp
from conftest import make_field

CROSS = [[1, 3], [1, 3.5], [3, 3], [5, 3], [3, 1], [3.5, 1], [3, 5]]


def cross_grid(L=6.0, c=3.0):
    return Grid("square", np.array([[0, c, L, c], [c, 0, c, L]], float), Point(0, 0), 4.0, L, ["h", "v"])


SMALL = [[0.9, 2.5], [2.5, 2.5], [4.1, 2.5], [2.5, 0.9], [2.5, 4.1]]


def solve(field, grid):
    flp = to_standard_lp(build_flow_network(field, grid, 0.0))
    return flp, solve_lp(flp.problem, "simplex")


def test_cross_network_matches_hand_construction():
    net = build_flow_network(make_field(CROSS, L=6), cross_grid(), 0.0)
    assert net.n_nodes == 2 * 7 + 3
    assert net.classes == ["horizontal", "horizontal", "mixed", "horizontal", "vertical", "vertical", "vertical"]
    got = sorted(net.arc_list())
    h, v, hv = ("h",), ("v",), ("h", "v")
    expected = [(f"s{k}_in", f"s{k}_out", c) for k, c in enumerate([h, h, hv, h, v, v, v])]
    for (a, b), c in {(0, 1): h, (0, 2): h, (2, 3): h, (2, 4): v, (2, 6): v, (4, 5): v}.items():
        expected += [(f"s{a}_out", f"s{b}_in", c), (f"s{b}_out", f"s{a}_in", c)]
    expected += [("s", "s0_in", h), ("s3_out", "mu", h), ("mu", "s4_in", v), ("s6_out", "d", v)]
    assert got == sorted(expected)
    # capacities of internal arcs equal batteries, all others unbounded
    for a in net.arcs:
        assert a.capacity == (1.0 if a.kind == "internal" else math.inf)


def test_cross_lp_charges_corner_twice_and_oracle_bounds_it():
    f = make_field(CROSS, L=6)
    flp, sol = solve(f, cross_grid())
    assert sol.objective == pytest.approx(0.5)
    assert max_flow_oracle(flp.network) == pytest.approx(1.0)


def test_missing_line_gives_zero_flow():
    f = make_field([p for p in CROSS if p != [3, 5]], L=6)
    flp, sol = solve(f, cross_grid())
    assert sol.objective == pytest.approx(0.0)
    assert max_flow_oracle(flp.network) == pytest.approx(0.0)


def test_bottleneck_chain():
    f = make_field(CROSS, L=6, battery=[1, 1, 1, 0.4, 1, 1, 1])
    flp, sol = solve(f, cross_grid())
    assert sol.objective == pytest.approx(0.4)
    assert max_flow_oracle(flp.network) == pytest.approx(0.4)


def test_two_parallel_crosses():
    # each unit of flow crosses a corner sensor in both layers, so two disjoint crosses
    # give 1 while the per-layer oracle counts each corner once per layer and reports 2
    twin = [[0.9, 2.6], [2.45, 2.55], [4.1, 2.4], [2.6, 0.9], [2.4, 4.1]]
    f = make_field(SMALL + twin, L=5)
    flp, sol = solve(f, cross_grid(5, 2.5))
    assert sol.objective == pytest.approx(1.0)
    assert max_flow_oracle(flp.network) == pytest.approx(2.0)


def test_single_line_lp_matrix():
    f = make_field([[1, 3], [3, 3], [5, 3]], L=6)
    g = Grid("square", np.array([[0, 3, 6, 3]], float), Point(0, 0), 4.0, 6.0, ["h"])
    flp = to_standard_lp(build_flow_network(f, g, 0.0))
    p = flp.problem
    assert p.var_names == ["x_s0_in_s0_out", "x_s1_in_s1_out", "x_s2_in_s2_out",
                           "x_s0_out_s1_in", "x_s1_out_s0_in", "x_s1_out_s2_in", "x_s2_out_s1_in",
                           "x_s_s0_in", "x_s2_out_mu"]
    A = np.array([[-1, 0, 0, 0, 1, 0, 0, 1, 0],
                  [1, 0, 0, -1, 0, 0, 0, 0, 0],
                  [0, -1, 0, 1, 0, 0, 1, 0, 0],
                  [0, 1, 0, 0, -1, -1, 0, 0, 0],
                  [0, 0, -1, 0, 0, 1, 0, 0, 0],
                  [0, 0, 1, 0, 0, 0, -1, 0, -1],
                  [0, 0, 0, 0, 0, 0, 0, 0, 1],
                  [0, 0, 0, 0, 0, 0, 0, 1, 0]], float)
    assert p.eq_names == [f"cons_h_s{k}_{io}" for k in range(3) for io in ("in", "out")] + \
        ["mu_conversion", "source_sink"]
    assert np.array_equal(p.A_eq.toarray(), A)
    assert np.array_equal(p.b_eq, np.zeros(8))
    assert np.array_equal(p.A_ub.toarray(), np.eye(3, 9))
    assert np.array_equal(p.b_ub, np.ones(3))
    assert np.array_equal(p.c, np.eye(9)[7])
    assert solve_lp(p, "simplex").objective == pytest.approx(0.0)


def test_no_sensors_no_arcs():
    f = make_field([[0.5, 0.5]], L=6)
    flp, sol = solve(f, cross_grid())
    assert flp.network.sensor_ids == [] and flp.network.arcs == []
    assert sol.optimal and sol.objective == 0.0


def test_depleted_batteries_give_zero():
    f = make_field(CROSS, L=6, battery=np.zeros(7))
    flp, sol = solve(f, cross_grid())
    assert sol.optimal and sol.objective == 0.0


def test_non_square_grid_rejected():
    f = make_field(CROSS, L=6)
    g = Grid("hexagonal", np.array([[0, 3, 6, 3]], float), Point(0, 0), 4.0, 6.0)
    with pytest.raises(ValueError):
        build_flow_network(f, g)


def test_decomposition_of_single_path():
    f = make_field([[1, 3], [3, 3], [5, 3], [3, 1], [3, 5]], L=6, battery=[0.3, 1, 1, 1, 1])
    flp, sol = solve(f, cross_grid())
    dec = decompose_paths(flp, sol)
    assert len(dec.paths) == 1
    assert dec.paths[0].delta == pytest.approx(0.3)
    assert dec.paths[0].sensors == (0, 1, 2, 3, 4)
    assert not dec.residual


def test_decomposition_two_paths():
    # two horizontal routes of 0.1 and 0.2 share the corner and the vertical route
    f = make_field(SMALL + [[0.9, 2.6], [4.1, 2.4]], L=5, battery=[0.1, 1, 0.1, 1, 1, 0.2, 0.2])
    flp, sol = solve(f, cross_grid(5, 2.5))
    dec = decompose_paths(flp, sol)
    assert sol.objective == pytest.approx(0.3)
    assert dec.total == pytest.approx(0.3)
    assert len(dec.paths) >= 2 and not dec.residual
    for p in dec.paths:
        assert p.nodes[0] == flp.network.s and p.nodes[-1] == flp.network.d
        assert flp.network.mu in p.nodes
        assert is_grid_cover(p.sensors, f, cross_grid(5, 2.5), 0.0)


def test_zero_flow_decomposes_to_nothing():
    f = make_field(CROSS[:-1], L=6)
    flp, sol = solve(f, cross_grid())
    dec = decompose_paths(flp, sol)
    assert dec.paths == [] and dec.total == 0.0


def _check_instance(seed, eps):
    kappa = 8.0
    f = generate_field(12, 2.0, seed)
    g = square_grid(12, kappa)
    w = eps * kappa / 2
    net = build_flow_network(f, g, w)
    flp = to_standard_lp(net)
    sol = solve_lp(flp.problem, "highs")
    assert sol.optimal
    assert residuals(flp.problem, sol.x) < 1e-7
    assert max_flow_oracle(net) >= sol.objective - 1e-7
    dec = decompose_paths(flp, sol)
    assert dec.total == pytest.approx(sol.objective, abs=1e-6)
    used = np.zeros(f.n)
    for cover, delta in flow_covers(dec, eps, 0):
        assert is_grid_cover(cover, f, g, w)
        used[list(cover.sensor_ids)] += delta
    assert np.all(used <= f.battery + 1e-7)
    for a in net.arcs:
        if a.kind == "internal":
            assert a.capacity == f.battery[net.node_sensor(a.tail)]


@settings(max_examples=15)
@given(st.integers(0, 10**6), st.sampled_from([0.0, 0.2]))
def test_flow_invariants_on_random_fields(seed, eps):
    _check_instance(seed, eps)


def test_flow_classes_follow_strips():
    f = generate_field(12, 2.0, 3)
    g = square_grid(12, 8.0)
    net = build_flow_network(f, g, 0.0)
    for k, cls in enumerate(net.classes):
        com = net.arcs[net.internal[net.sensor_ids[k]]].commodities
        assert cls == {("h",): "horizontal", ("v",): "vertical", ("h", "v"): "mixed"}[com]
    for a in net.arcs:
        if a.tail == net.s:
            assert a.commodities == ("h",)
        if a.head == net.d or a.tail == net.mu:
            assert a.commodities == ("v",)
        if a.head == net.mu:
            assert a.commodities == ("h",)
