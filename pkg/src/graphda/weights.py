"""Edge-weight re-estimation as a linear program.

With the label estimate ``f`` held fixed, each surviving edge ``e = (i, j)``
gets one variable ``W_e in [0, 1]`` and cost

    2 * (mu_x * ||x_i - x_j||^2 - sum_c h_ic h_jc),    h = D^{-1/2} f

(the factor 2 counts both orientations of the symmetric matrix). Row sums are
kept within ``[min(d_min, deg_count_i), d_max]``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleWeightsError, IsolatedNodeError
from .graph import WeightMatrix, degree_vector
from .linprog import LpProblem, LpSolution, LpStatus

ZERO_EDGE = 1e-12


@dataclass(frozen=True, eq=False)
class WeightLpSpec:
    """Per-edge data behind one weight LP."""

    W: WeightMatrix
    sq_distances: np.ndarray
    smoothness: np.ndarray
    mu_x: float
    d_min: float
    d_max: float
    node_lower: np.ndarray

    @property
    def costs(self) -> np.ndarray:
        return 2.0 * (self.mu_x * self.sq_distances - self.smoothness)

    def objective_at(self, weights) -> float:
        return float(self.costs @ np.asarray(weights, dtype=float))


def incidence(W: WeightMatrix) -> np.ndarray:
    """Dense node-by-edge incidence matrix (one column per stored edge)."""
    E = W.edge_count
    A = np.zeros((W.n, E))
    A[W.rows, np.arange(E)] = 1.0
    A[W.cols, np.arange(E)] = 1.0
    return A


def build_weight_lp(points, W: WeightMatrix, f_hat, degrees, mu_x: float,
                    d_min: float, d_max: float) -> tuple[WeightLpSpec, LpProblem]:
    """Assemble the weight LP over the current edge set of ``W``.

    ``degrees`` are the degrees used to form ``h = D^{-1/2} f_hat`` and must
    come from before the update. A node with fewer than ``d_min`` edges gets
    its lower degree bound clamped to its edge count, since each weight is
    capped at 1.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if mu_x < 0:
        raise ValueError("mu_x must be nonnegative")
    if not 0 < d_min <= d_max:
        raise ValueError("need 0 < d_min <= d_max")
    degrees = np.asarray(degrees, dtype=float)
    zero = np.flatnonzero(degrees <= 0)
    if zero.size:
        raise IsolatedNodeError(zero[0])
    F = np.asarray(f_hat, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    if F.shape[0] != W.n or degrees.size != W.n or X.shape[0] != W.n:
        raise ValueError("points, f_hat and degrees must have one row per node")

    H = F / np.sqrt(degrees)[:, None]
    r, c = W.rows, W.cols
    diff = X[r] - X[c]
    sq = np.einsum("ij,ij->i", diff, diff)
    smooth = np.einsum("ij,ij->i", H[r], H[c])
    counts = W.neighbor_counts().astype(float)
    lower = np.minimum(d_min, counts)

    spec = WeightLpSpec(W, sq, smooth, float(mu_x), float(d_min), float(d_max), lower)
    E = W.edge_count
    lp = LpProblem(spec.costs, incidence(W), lower, np.full(W.n, float(d_max)),
                   np.zeros(E), np.ones(E))
    return spec, lp


def update_weights(spec: WeightLpSpec, solution: LpSolution) -> WeightMatrix:
    """Write the LP solution back onto the edge set.

    Values below 1e-12 become structural zeros and the edge disappears.
    """
    if solution.status is not LpStatus.OPTIMAL:
        if solution.status is LpStatus.INFEASIBLE:
            lacking = np.flatnonzero(spec.node_lower > spec.W.neighbor_counts() + 1e-12)
            if lacking.size == 0:
                lacking = np.flatnonzero(spec.node_lower > spec.d_max)
            raise InfeasibleWeightsError(lacking if lacking.size else range(spec.W.n))
        raise RuntimeError(f"weight LP returned status {solution.status.value}")
    w = np.clip(np.asarray(solution.x, dtype=float), 0.0, 1.0)
    w[w < ZERO_EDGE] = 0.0
    return spec.W.with_weights(w)


def learn_weights(points, W: WeightMatrix, f_hat, mu_x, d_min, d_max, solver=None):
    """One weight update: returns ``(new_W, spec, solution)``."""
    from .linprog import solve_lp

    spec, lp = build_weight_lp(points, W, f_hat, degree_vector(W), mu_x, d_min, d_max)
    sol = (solver or solve_lp)(lp)
    return update_weights(spec, sol), spec, sol
