import numpy as np
import pytest
from hypothesis import given, strategies as st

from graphda.errors import TooLargeError
from graphda.linprog import LpProblem, LpStatus, solve_lp, vertex_enumeration_oracle
from oracles import brute_lp_grid, random_lp

INF = np.inf


def _both(p):
    return solve_lp(p), vertex_enumeration_oracle(p)


def test_minimize_x_on_unit_box():
    p = LpProblem.from_rows([1.0], bounds=[(0, 1)])
    for sol in _both(p):
        assert sol.status is LpStatus.OPTIMAL
        assert sol.x.tolist() == [0.0] and sol.objective == 0.0


def test_hand_lp():
    p = LpProblem.from_rows([-1, -1], [([1, 1], None, 1)], [(0, 1), (0, 1)])
    for sol in _both(p):
        assert sol.objective == pytest.approx(-1, abs=1e-12)
        assert sol.x.sum() == pytest.approx(1, abs=1e-12)


def test_infeasible():
    p = LpProblem.from_rows([1.0], [([1.0], 2, None), ([1.0], None, 1)], [(None, None)])
    assert solve_lp(p).status is LpStatus.INFEASIBLE
    q = LpProblem.from_rows([1.0], [([1.0], 2, None), ([1.0], None, 1)], [(0, None)])
    assert vertex_enumeration_oracle(q).status is LpStatus.INFEASIBLE


def test_unbounded():
    p = LpProblem.from_rows([-1.0, 0.0], [([1, -1], None, 1)], [(0, None), (0, None)])
    assert solve_lp(p).status is LpStatus.UNBOUNDED
    assert vertex_enumeration_oracle(p).status is LpStatus.UNBOUNDED


def test_degenerate_redundant_rows():
    rows = [([1, 1], None, 1), ([2, 2], None, 2), ([1, 0], None, 1), ([1, 1], None, 1.5)]
    p = LpProblem.from_rows([-1, -2], rows, [(0, None), (0, None)])
    a, b = _both(p)
    assert a.objective == pytest.approx(b.objective, abs=1e-9) == pytest.approx(-2)


def test_equality_row():
    p = LpProblem.from_rows([1, 2, 3], [([1, 1, 1], 1, 1)], [(0, None)] * 3)
    sol = solve_lp(p)
    np.testing.assert_allclose(sol.x, [1, 0, 0], atol=1e-12)


def test_oracle_limits():
    p = LpProblem.from_rows(np.ones(11), bounds=[(0, 1)] * 11)
    with pytest.raises(TooLargeError):
        vertex_enumeration_oracle(p)


def test_problem_validation():
    with pytest.raises(ValueError):
        LpProblem.from_rows([1.0], bounds=[(2, 1)])
    with pytest.raises(ValueError):
        LpProblem.from_rows([np.nan])
    with pytest.raises(ValueError):
        LpProblem.from_rows([1.0], [([1.0], 3, 2)])


def test_200_random_lps_match_oracle():
    r = np.random.default_rng(2024)
    count = 0
    while count < 200:
        p = random_lp(r, max_vars=8)
        try:
            ref = vertex_enumeration_oracle(p)
        except ValueError:
            continue
        count += 1
        got = solve_lp(p)
        assert got.status is ref.status
        if ref.optimal:
            assert got.objective == pytest.approx(ref.objective, abs=1e-9)
            assert p.max_violation(got.x) <= 1e-9


def test_small_lps_match_grid_search():
    r = np.random.default_rng(8)
    for _ in range(30):
        n = int(r.integers(1, 3))
        rows = [(np.round(r.uniform(-1, 1, n), 2), None, float(r.uniform(0, 2)))
                for _ in range(int(r.integers(0, 3)))]
        p = LpProblem.from_rows(np.round(r.uniform(-1, 1, n), 2), rows, [(0, 1)] * n)
        sol = solve_lp(p)
        # the grid only samples the region, so it can never beat the optimum
        assert sol.objective <= brute_lp_grid(p) + 1e-12


def _tight_count(p, x, tol=1e-9):
    ax = p.A @ x
    return int(np.sum(np.abs(x - p.lb) <= tol) + np.sum(np.abs(x - p.ub) <= tol)
               + np.sum(np.abs(ax - p.lo) <= tol) + np.sum(np.abs(ax - p.up) <= tol))


@given(st.integers(0, 2**32 - 1))
def test_optimal_is_vertex_and_beats_samples(seed):
    r = np.random.default_rng(seed)
    n = int(r.integers(1, 6))
    m = int(r.integers(1, 6))
    A = np.round(r.uniform(0, 1, (m, n)), 2)
    p = LpProblem(np.round(r.uniform(-1, 1, n), 2), A, -INF, np.round(r.uniform(0.5, 3, m), 1),
                  np.zeros(n), np.ones(n))
    sol = solve_lp(p)
    assert sol.optimal
    assert p.max_violation(sol.x) <= 1e-9
    assert _tight_count(p, sol.x) >= n
    pts = r.uniform(0, 1, (1000, n))
    feas = pts[np.all(pts @ A.T <= p.up, axis=1)]
    if feas.size:
        assert np.min(feas @ p.c) >= sol.objective - 1e-9


def test_deterministic():
    r = np.random.default_rng(5)
    for _ in range(20):
        p = random_lp(r)
        a, b = solve_lp(p), solve_lp(p)
        assert a.status is b.status
        np.testing.assert_array_equal(a.x, b.x)


def test_degenerate_cycling_example():
    # Beale's cycling example; Dantzig pricing alone can cycle on it
    c = [-0.75, 150, -0.02, 6]
    rows = [([0.25, -60, -0.04, 9], None, 0), ([0.5, -90, -0.02, 3], None, 0),
            ([0, 0, 1, 0], None, 1)]
    p = LpProblem.from_rows(c, rows, [(0, None)] * 4)
    a, b = _both(p)
    assert a.optimal and a.objective == pytest.approx(b.objective, abs=1e-9)
    assert a.objective == pytest.approx(-0.05, abs=1e-12)
