import numpy as np
import pytest
from hypothesis import given, strategies as st

from graphda.errors import InfeasibleWeightsError, IsolatedNodeError
from graphda.graph import WeightMatrix, degree_vector
from graphda.linprog import LpSolution, LpStatus, solve_lp, vertex_enumeration_oracle
from graphda.weights import build_weight_lp, incidence, learn_weights, update_weights
from oracles import random_graph


def _triangle():
    return WeightMatrix.from_edges(3, {(0, 1): 0.5, (0, 2): 0.5, (1, 2): 0.5})


def test_single_edge_forced_to_one():
    W = WeightMatrix.from_edges(2, {(0, 1): 0.3})
    for f in (np.array([1.0, -1.0]), np.array([1.0, 1.0])):
        new, _, _ = learn_weights(np.array([[0.0], [5.0]]), W, f, 10.0, 1.0, 1.0)
        assert new.weights.tolist() == [1.0]


def test_triangle_costs_and_oracle():
    W = _triangle()
    # degrees are 1, so h equals f
    spec, lp = build_weight_lp(np.zeros((3, 1)), W, np.array([1.0, 1.0, -1.0]),
                               np.ones(3), 0.0, 0.5, 2.0)
    np.testing.assert_allclose(spec.costs, [-2, 2, 2])
    got, ref = solve_lp(lp), vertex_enumeration_oracle(lp)
    assert got.objective == pytest.approx(ref.objective, abs=1e-9)
    assert got.x[0] == 1.0
    # node 2 needs degree 0.5 from its two cross edges; the cost is the same either way
    assert got.x[1] + got.x[2] == pytest.approx(0.5)
    assert ref.objective == pytest.approx(-1.0)


def test_large_mu_drives_weights_to_degree_floor():
    W = _triangle()
    X = np.array([[0.0], [1.0], [3.0]])
    spec, lp = build_weight_lp(X, W, np.zeros(3), degree_vector(W), 100.0, 0.5, 2.0)
    got, ref = solve_lp(lp), vertex_enumeration_oracle(lp)
    assert got.objective == pytest.approx(ref.objective, abs=1e-9)
    # nodes 0 and 2 sit at the floor; the long edge (0,2) carries nothing
    np.testing.assert_allclose(got.x, [0.5, 0.0, 0.5], atol=1e-12)
    np.testing.assert_allclose(incidence(W) @ got.x, [0.5, 1.0, 0.5], atol=1e-9)


def test_lower_bound_clamped_to_edge_count():
    W = WeightMatrix.from_edges(3, {(0, 1): 1.0, (1, 2): 1.0})
    spec, _ = build_weight_lp(np.zeros((3, 1)), W, np.zeros(3), degree_vector(W), 0.0, 1.5, 3.0)
    np.testing.assert_array_equal(spec.node_lower, [1.0, 1.5, 1.0])


def test_isolated_node_rejected():
    W = WeightMatrix.from_edges(3, {(0, 1): 1.0})
    with pytest.raises(IsolatedNodeError):
        build_weight_lp(np.zeros((3, 1)), W, np.zeros(3), degree_vector(W), 0.0, 1.0, 2.0)


@pytest.mark.parametrize("args", [(-1.0, 1.0, 2.0), (0.0, 0.0, 1.0), (0.0, 3.0, 2.0)])
def test_bad_parameters(args):
    W = _triangle()
    with pytest.raises(ValueError):
        build_weight_lp(np.zeros((3, 1)), W, np.zeros(3), degree_vector(W), *args)


class TestUpdate:
    def test_identity_round_trip(self):
        W = _triangle()
        spec, _ = build_weight_lp(np.zeros((3, 1)), W, np.zeros(3), degree_vector(W), 0.0, 0.5, 2.0)
        sol = LpSolution(W.weights.copy(), spec.objective_at(W.weights), LpStatus.OPTIMAL)
        assert update_weights(spec, sol) == W

    def test_zero_variable_drops_edge(self):
        W = _triangle()
        spec, _ = build_weight_lp(np.zeros((3, 1)), W, np.zeros(3), degree_vector(W), 0.0, 0.5, 2.0)
        new = update_weights(spec, LpSolution(np.array([1.0, 0.0, 1e-13]), 0.0, LpStatus.OPTIMAL))
        assert new.edge_count == 1 and new.weights.tolist() == [1.0]

    def test_infeasible_reports_nodes(self):
        W = _triangle()
        spec, _ = build_weight_lp(np.zeros((3, 1)), W, np.zeros(3), degree_vector(W), 0.0, 0.5, 2.0)
        with pytest.raises(InfeasibleWeightsError):
            update_weights(spec, LpSolution(np.full(3, np.nan), np.nan, LpStatus.INFEASIBLE))

    def test_unbounded_is_runtime_error(self):
        W = _triangle()
        spec, _ = build_weight_lp(np.zeros((3, 1)), W, np.zeros(3), degree_vector(W), 0.0, 0.5, 2.0)
        with pytest.raises(RuntimeError):
            update_weights(spec, LpSolution(np.full(3, np.nan), -np.inf, LpStatus.UNBOUNDED))


@given(st.integers(0, 2**32 - 1))
def test_random_update_invariants(seed):
    r = np.random.default_rng(seed)
    n = int(r.integers(4, 15))
    W = random_graph(r, n, p=0.4)
    X = r.normal(size=(n, 2))
    F = r.normal(size=(n, 2))
    d_min, d_max = float(r.uniform(0.2, 1.0)), float(r.uniform(1.0, 3.0))
    new, spec, sol = learn_weights(X, W, F, float(r.uniform(0, 2)), d_min, d_max)
    assert sol.optimal
    # new edges are a subset of old ones, weights in (0, 1]
    old = set(zip(W.rows.tolist(), W.cols.tolist()))
    assert set(zip(new.rows.tolist(), new.cols.tolist())) <= old
    assert np.all(new.weights > 0) and np.all(new.weights <= 1)
    A = new.to_dense()
    np.testing.assert_array_equal(A, A.T)
    deg = degree_vector(new)
    assert np.all(deg >= spec.node_lower - 1e-8) and np.all(deg <= d_max + 1e-8)
    # the LP can always keep the old weights when they are feasible
    prev = np.clip(W.weights, 0, 1)
    rows = incidence(W) @ prev
    if np.all(rows >= spec.node_lower - 1e-12) and np.all(rows <= d_max + 1e-12):
        assert sol.objective <= spec.objective_at(prev) + 1e-9
