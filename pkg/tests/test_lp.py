import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

from kweak.lp import LPProblem, residuals, simplex, solve_lp, write_lp_file


def lp(c, A_eq=None, b_eq=(), A_ub=None, b_ub=(), upper=None):
    n = len(c)
    return LPProblem(np.array(c, float), np.zeros((len(b_eq), n)) if A_eq is None else np.array(A_eq, float),
                     np.array(b_eq, float), np.zeros((len(b_ub), n)) if A_ub is None else np.array(A_ub, float),
                     np.array(b_ub, float), np.full(n, np.inf) if upper is None else np.array(upper, float))


@pytest.mark.parametrize("method", ["simplex", "highs"])
def test_single_bound(method):
    sol = solve_lp(lp([1.0], A_ub=[[1.0]], b_ub=[3.0]), method)
    assert sol.optimal and sol.objective == pytest.approx(3.0)


@pytest.mark.parametrize("method", ["simplex", "highs"])
def test_infeasible_equality(method):
    assert solve_lp(lp([1.0], A_eq=[[0.0]], b_eq=[1.0]), method).status == "infeasible"


@pytest.mark.parametrize("method", ["simplex", "highs"])
def test_unbounded(method):
    assert solve_lp(lp([1.0, 0.0], A_ub=[[0.0, 1.0]], b_ub=[1.0]), method).status == "unbounded"


def test_upper_bounds_respected():
    sol = simplex(lp([1.0, 2.0], A_ub=[[1.0, 1.0]], b_ub=[10.0], upper=[4.0, 3.0]))
    assert sol.objective == pytest.approx(10.0)
    assert np.allclose(sol.x, [4.0, 3.0])


def test_degenerate_cycle_prone_problem():
    # a classic degenerate instance on which Dantzig's rule cycles
    c = [0.75, -150, 0.02, -6]
    A = [[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]]
    sol = simplex(lp(c, A_ub=A, b_ub=[0, 0, 1]))
    ref = linprog(-np.array(c), A_ub=A, b_ub=[0, 0, 1], method="highs")
    assert sol.objective == pytest.approx(-ref.fun, abs=1e-9)


@given(st.integers(0, 10**6), st.integers(1, 7), st.integers(0, 4), st.integers(1, 5))
def test_simplex_matches_highs(seed, n, m_eq, m_ub):
    rng = np.random.default_rng(seed)
    x0 = rng.uniform(0, 2, n)
    A_eq = rng.integers(-2, 3, (m_eq, n)).astype(float)
    A_ub = rng.uniform(0, 2, (m_ub, n))
    A_ub[0] += 0.1                               # every column bounded by row 0
    upper = np.where(rng.random(n) < 0.5, rng.uniform(2, 4, n), np.inf)
    p = lp(rng.normal(size=n), A_eq, A_eq @ x0, A_ub, A_ub @ x0 + rng.uniform(0, 1, m_ub), upper)
    a, b = solve_lp(p, "simplex"), solve_lp(p, "highs")
    assert a.status == b.status == "optimal"
    assert a.objective == pytest.approx(b.objective, abs=1e-7)
    assert residuals(p, a.x) < 1e-8


@given(st.integers(0, 10**6))
def test_infeasibility_agrees(seed):
    rng = np.random.default_rng(seed)
    A_eq = rng.integers(-2, 3, (3, 4)).astype(float)
    p = lp(rng.normal(size=4), A_eq, rng.integers(-3, 4, 3).astype(float), upper=np.full(4, 1.0))
    assert solve_lp(p, "simplex").status == solve_lp(p, "highs").status


def test_auto_picks_by_size():
    assert solve_lp(lp([1.0], A_ub=[[1.0]], b_ub=[1.0])).method == "simplex"


def test_unknown_method():
    with pytest.raises(ValueError):
        solve_lp(lp([1.0], A_ub=[[1.0]], b_ub=[1.0]), "interior")


def test_non_finite_entries_rejected():
    with pytest.raises(ValueError):
        lp([np.nan])


def test_write_lp_file(tmp_path):
    p = lp([1.0, 2.0], A_eq=[[1.0, -1.0]], b_eq=[0.0], A_ub=[[1.0, 0.5]], b_ub=[3.0], upper=[np.inf, 2.0])
    p.var_names, p.eq_names, p.ub_names = ["a", "b"], ["bal"], ["cap"]
    f = tmp_path / "m.lp"
    write_lp_file(p, f)
    text = f.read_text()
    assert text.splitlines()[1:4] == ["Maximize", " obj: + a + 2 b", "Subject To"]
    assert " bal: + a - b = 0" in text
    assert " cap: + a + 0.5 b <= 3" in text
    assert " a >= 0" in text and " 0 <= b <= 2" in text
    assert text.rstrip().endswith("End")
