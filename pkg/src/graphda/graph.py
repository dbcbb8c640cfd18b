"""Weighted undirected graphs: k-NN construction, degrees, Laplacians.

A :class:`WeightMatrix` stores each unordered edge ``(i, j)`` with ``i < j``
exactly once, so symmetry holds by construction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IsolatedNodeError


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """Sparse symmetric nonnegative edge weights on ``n`` nodes.

    Edges are kept sorted lexicographically by ``(rows, cols)`` with
    ``rows < cols`` and strictly positive weights.
    """

    n: int
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        weights = np.asarray(self.weights, dtype=float)
        if not (rows.shape == cols.shape == weights.shape) or rows.ndim != 1:
            raise ValueError("rows, cols and weights must be 1-d arrays of equal length")
        if rows.size:
            if np.any(rows >= cols):
                raise ValueError("edges must satisfy i < j (no self-loops, one orientation)")
            if rows.min() < 0 or cols.max() >= self.n:
                raise ValueError("edge endpoint out of range")
            if np.any(~np.isfinite(weights)) or np.any(weights <= 0):
                raise ValueError("edge weights must be finite and strictly positive")
            order = np.lexsort((cols, rows))
            rows, cols, weights = rows[order], cols[order], weights[order]
            key = rows * self.n + cols
            if np.any(np.diff(key) == 0):
                raise ValueError("duplicate edge")
        for arr in (rows, cols, weights):
            arr.setflags(write=False)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def empty(cls, n: int) -> "WeightMatrix":
        z = np.zeros(0)
        return cls(n, z.astype(np.int64), z.astype(np.int64), z)

    @classmethod
    def from_edges(cls, n: int, edges) -> "WeightMatrix":
        """Build from ``{(i, j): w}`` or an iterable of ``(i, j, w)``.

        Pairs may be given in either orientation; zero weights are dropped.
        """
        items = edges.items() if isinstance(edges, dict) else (((e[0], e[1]), e[2]) for e in edges)
        acc: dict[tuple[int, int], float] = {}
        for (i, j), w in items:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError("self-loops are not allowed")
            key = (min(i, j), max(i, j))
            if key in acc:
                raise ValueError(f"duplicate edge {key}")
            if w != 0:
                acc[key] = float(w)
        if not acc:
            return cls.empty(n)
        keys = sorted(acc)
        r = np.array([k[0] for k in keys])
        c = np.array([k[1] for k in keys])
        return cls(n, r, c, np.array([acc[k] for k in keys]))

    @classmethod
    def from_dense(cls, A, atol: float = 0.0) -> "WeightMatrix":
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("dense weight matrix must be square")
        if not np.allclose(A, A.T, rtol=0, atol=atol):
            raise ValueError("dense weight matrix is not symmetric")
        if np.any(np.diag(A) != 0):
            raise ValueError("self-loops are not allowed")
        r, c = np.nonzero(np.triu(A, k=1))
        return cls(A.shape[0], r, c, A[r, c])

    @property
    def edge_count(self) -> int:
        return int(self.rows.size)

    def to_dense(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        A[self.rows, self.cols] = self.weights
        A[self.cols, self.rows] = self.weights
        return A

    def edges(self):
        """Iterate ``(i, j, w)`` with ``i < j``."""
        return zip(self.rows.tolist(), self.cols.tolist(), self.weights.tolist())

    def neighbor_lists(self) -> list[list[int]]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in zip(self.rows.tolist(), self.cols.tolist()):
            nbrs[i].append(j)
            nbrs[j].append(i)
        for lst in nbrs:
            lst.sort()
        return nbrs

    def neighbor_counts(self) -> np.ndarray:
        return np.bincount(np.concatenate([self.rows, self.cols]), minlength=self.n)

    def with_weights(self, weights) -> "WeightMatrix":
        """Same edge set with new weights; entries that are exactly zero are dropped."""
        weights = np.asarray(weights, dtype=float)
        keep = weights != 0
        return WeightMatrix(self.n, self.rows[keep], self.cols[keep], weights[keep])

    def permuted(self, perm) -> "WeightMatrix":
        """Relabel node ``k`` as ``perm[k]``."""
        perm = np.asarray(perm)
        a, b = perm[self.rows], perm[self.cols]
        return WeightMatrix(self.n, np.minimum(a, b), np.maximum(a, b), self.weights)

    def __eq__(self, other):
        if not isinstance(other, WeightMatrix):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
            and np.array_equal(self.weights, other.weights)
        )

    def __repr__(self):
        return f"WeightMatrix(n={self.n}, edges={self.edge_count})"


def pairwise_sq_distances(X, chunk: int = 64) -> np.ndarray:
    """Exact squared Euclidean distances from coordinate differences.

    Row blocks keep memory bounded for high-dimensional inputs; the result
    is bitwise symmetric.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    D = np.empty((n, n))
    for start in range(0, n, chunk):
        diff = X[start:start + chunk, None, :] - X[None, :, :]
        D[start:start + chunk] = np.einsum("ijk,ijk->ij", diff, diff)
    return D


def build_knn_graph(points, K: int, sigma="auto") -> WeightMatrix:
    """Gaussian-weighted K-nearest-neighbour graph.

    An edge exists when either endpoint selects the other among its ``K``
    nearest neighbours (ties go to the lower index). Weights are
    ``exp(-||x_i - x_j||^2 / sigma^2)``. With ``sigma="auto"`` the width is
    the mean distance over all ``n*K`` selected (node, neighbour) pairs.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if n < 2:
        raise ValueError("need at least two points")
    K = int(K)
    if not 1 <= K < n:
        raise ValueError(f"K must satisfy 1 <= K < n (got K={K}, n={n})")
    D2 = pairwise_sq_distances(X)
    masked = D2.copy()
    np.fill_diagonal(masked, np.inf)
    nbr = np.argsort(masked, axis=1, kind="stable")[:, :K]

    src = np.repeat(np.arange(n), K)
    dst = nbr.ravel()
    if isinstance(sigma, str):
        if sigma != "auto":
            raise ValueError(f"sigma must be positive or 'auto', got {sigma!r}")
        sigma = float(np.mean(np.sqrt(D2[src, dst])))
        if sigma == 0.0:
            sigma = 1.0
    else:
        sigma = float(sigma)
        if not sigma > 0:
            raise ValueError("sigma must be positive")

    lo, hi = np.minimum(src, dst), np.maximum(src, dst)
    key = np.unique(lo * n + hi)
    r, c = key // n, key % n
    w = np.exp(-D2[r, c] / sigma**2)
    keep = w > 0
    return WeightMatrix(n, r[keep], c[keep], w[keep])


def degree_vector(W: WeightMatrix) -> np.ndarray:
    """Node degrees ``d_i = sum_j W_ij``, accumulated in ascending ``j``."""
    node = np.concatenate([W.rows, W.cols])
    other = np.concatenate([W.cols, W.rows])
    w = np.concatenate([W.weights, W.weights])
    order = np.lexsort((other, node))
    return np.bincount(node[order], weights=w[order], minlength=W.n).astype(float)


def laplacian(W: WeightMatrix) -> np.ndarray:
    """Combinatorial Laplacian ``D - W`` as a dense array."""
    A = W.to_dense()
    return np.diag(degree_vector(W)) - A


def normalized_laplacian(W: WeightMatrix) -> np.ndarray:
    """Symmetric normalized Laplacian ``D^-1/2 (D - W) D^-1/2``.

    Raises
    ------
    IsolatedNodeError
        If any node has zero degree.
    """
    d = degree_vector(W)
    zero = np.flatnonzero(d <= 0)
    if zero.size:
        raise IsolatedNodeError(zero[0])
    s = 1.0 / np.sqrt(d)
    L = -(s[:, None] * W.to_dense() * s[None, :])
    L = 0.5 * (L + L.T)
    np.fill_diagonal(L, 1.0)
    return L


def dirichlet_energy(L, f) -> float:
    """Quadratic form ``f^T L f``; columns of a 2-d ``f`` are summed."""
    L = np.asarray(L, dtype=float)
    f = np.asarray(f, dtype=float)
    if f.shape[0] != L.shape[0]:
        raise ValueError(f"signal length {f.shape[0]} does not match graph size {L.shape[0]}")
    return float(np.sum(f * (L @ f)))


def prune_edges(W: WeightMatrix, w_min: float) -> WeightMatrix:
    """Drop edges with weight strictly below ``w_min``."""
    if w_min < 0:
        raise ValueError("w_min must be nonnegative")
    keep = W.weights >= w_min
    if keep.all():
        return W
    return WeightMatrix(W.n, W.rows[keep], W.cols[keep], W.weights[keep])


def connected_components(W: WeightMatrix) -> np.ndarray:
    """Component label per node, numbered in order of each component's lowest node."""
    parent = np.arange(W.n)

    def find(a):
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    for i, j in zip(W.rows.tolist(), W.cols.tolist()):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    labels = np.empty(W.n, dtype=np.int64)
    seen: dict[int, int] = {}
    for v in range(W.n):
        r = find(v)
        if r not in seen:
            seen[r] = len(seen)
        labels[v] = seen[r]
    return labels


def unlabeled_components(W: WeightMatrix, labeled) -> list[int]:
    """Nodes whose component contains none of ``labeled``."""
    comp = connected_components(W)
    ok = np.zeros(comp.max() + 1 if comp.size else 0, dtype=bool)
    ok[comp[np.asarray(labeled, dtype=np.int64)]] = True
    return np.flatnonzero(~ok[comp]).tolist()
