import numpy as np
import pytest
from hypothesis import given, strategies as st

from graphda.graph import WeightMatrix, degree_vector, laplacian, normalized_laplacian
from graphda.spectral import gft, igft, smallest_eigenpairs
from oracles import jacobi_eigh, projector, random_graph


def _psd(seed, n):
    r = np.random.default_rng(seed)
    B = r.normal(size=(n, n))
    return B @ B.T / n


def test_two_node_basis():
    L = normalized_laplacian(WeightMatrix.from_edges(2, {(0, 1): 1.0}))
    b = smallest_eigenpairs(L, 2)
    np.testing.assert_allclose(b.values, [0, 2], atol=1e-14)
    s = 1 / np.sqrt(2)
    np.testing.assert_allclose(b.vectors, [[s, s], [s, -s]], atol=1e-14)


def test_null_vector_of_connected_graph(rng):
    W = random_graph(rng, 15)
    b = smallest_eigenpairs(normalized_laplacian(W), 3)
    assert b.values[0] == pytest.approx(0, abs=1e-8)
    target = np.sqrt(degree_vector(W))
    target /= np.linalg.norm(target)
    np.testing.assert_allclose(b.vectors[:, 0], target, atol=1e-8)


def test_matches_jacobi_oracle():
    r = np.random.default_rng(3)
    W = random_graph(r, 30, p=0.2)
    L = normalized_laplacian(W)
    b = smallest_eigenpairs(L, 5)
    vals, vecs = jacobi_eigh(L)
    np.testing.assert_allclose(b.values, vals[:5], atol=1e-8)
    # compare subspaces, not raw vectors
    np.testing.assert_allclose(projector(b.vectors), projector(vecs[:, :5]), atol=1e-8)


def test_sign_convention(rng):
    b = smallest_eigenpairs(laplacian(random_graph(rng, 20)), 6)
    for k in range(b.R):
        v = b.vectors[:, k]
        assert v[np.flatnonzero(np.abs(v) > 1e-12)[0]] > 0


def test_repeated_eigenvalues_are_deterministic():
    # two disjoint triangles: eigenvalue 0 twice, 1.5 four times
    tri = {(0, 1): 1, (1, 2): 1, (0, 2): 1, (3, 4): 1, (4, 5): 1, (3, 5): 1}
    L = normalized_laplacian(WeightMatrix.from_edges(6, tri))
    a = smallest_eigenpairs(L, 6)
    b = smallest_eigenpairs(L.copy(), 6)
    np.testing.assert_array_equal(a.vectors, b.vectors)
    np.testing.assert_allclose(a.values, [0, 0, 1.5, 1.5, 1.5, 1.5], atol=1e-12)


@pytest.mark.parametrize("R", [0, 4])
def test_R_out_of_range(R):
    with pytest.raises(ValueError):
        smallest_eigenpairs(np.eye(3), R)


def test_non_symmetric_rejected():
    with pytest.raises(ValueError):
        smallest_eigenpairs(np.array([[1.0, 0.5], [0.0, 1.0]]), 1)


@given(st.integers(0, 2**32 - 1), st.integers(2, 60))
def test_invariants_on_psd_inputs(seed, n):
    L = _psd(seed, n)
    R = max(1, n // 3)
    b = smallest_eigenpairs(L, R)
    assert np.all(np.diff(b.values) >= 0)
    assert b.values[0] >= -1e-8
    res = np.linalg.norm(L @ b.vectors - b.vectors * b.values, axis=0)
    assert np.all(res <= 1e-8 * np.maximum(1, b.values))
    np.testing.assert_allclose(b.vectors.T @ b.vectors, np.eye(R), atol=1e-10)


class TestTransforms:
    def test_gft_of_basis_vector(self, rng):
        b = smallest_eigenpairs(laplacian(random_graph(rng, 12)), 4)
        np.testing.assert_allclose(gft(b, b.vectors[:, 1]), [0, 1, 0, 0], atol=1e-12)

    def test_zero(self, rng):
        b = smallest_eigenpairs(laplacian(random_graph(rng, 12)), 4)
        np.testing.assert_array_equal(gft(b, np.zeros(12)), np.zeros(4))
        np.testing.assert_array_equal(igft(b, np.zeros(4)), np.zeros(12))

    def test_full_round_trip(self, rng):
        b = smallest_eigenpairs(laplacian(random_graph(rng, 16)), 16)
        f = rng.normal(size=16)
        np.testing.assert_allclose(igft(b, gft(b, f)), f, atol=1e-10)

    def test_first_coefficient_is_sqrt_degree_direction(self, rng):
        W = random_graph(rng, 10)
        b = smallest_eigenpairs(normalized_laplacian(W), 3)
        f = igft(b, np.array([1.0, 0, 0]))
        assert np.all(f > 0)
        np.testing.assert_allclose(f / np.linalg.norm(f),
                                   np.sqrt(degree_vector(W)) / np.linalg.norm(np.sqrt(degree_vector(W))),
                                   atol=1e-8)

    def test_dimension_errors(self, rng):
        b = smallest_eigenpairs(laplacian(random_graph(rng, 6)), 2)
        with pytest.raises(ValueError):
            gft(b, np.ones(5))
        with pytest.raises(ValueError):
            igft(b, np.ones(3))

    @given(st.integers(0, 2**32 - 1))
    def test_band_limit(self, seed):
        r = np.random.default_rng(seed)
        L = normalized_laplacian(random_graph(r, 25))
        b = smallest_eigenpairs(L, 6)
        alpha = r.normal(size=6)
        f = igft(b, alpha)
        energy = f @ L @ f
        assert energy == pytest.approx(np.sum(b.values * alpha**2), abs=1e-8)
        assert energy <= b.top * alpha @ alpha + 1e-8
