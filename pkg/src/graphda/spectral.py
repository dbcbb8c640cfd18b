"""Graph Fourier bases from the low end of a Laplacian spectrum."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CLUSTER_WIDTH = 1e-10
SIGN_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """The ``R`` smallest eigenpairs of a symmetric Laplacian.

    ``vectors`` is ``n x R`` with orthonormal columns; ``values`` ascends.
    """

    values: np.ndarray
    vectors: np.ndarray

    @property
    def R(self) -> int:
        return int(self.values.size)

    @property
    def n(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def top(self) -> float:
        """Largest retained eigenvalue (the band limit)."""
        return float(self.values[-1])


def _fix_signs(U: np.ndarray) -> np.ndarray:
    for k in range(U.shape[1]):
        big = np.flatnonzero(np.abs(U[:, k]) > SIGN_EPS)
        if big.size and U[big[0], k] < 0:
            U[:, k] = -U[:, k]
    return U


def _order_clusters(vals: np.ndarray, U: np.ndarray):
    k = 0
    n = vals.size
    while k < n:
        end = k + 1
        while end < n and vals[end] - vals[end - 1] <= CLUSTER_WIDTH:
            end += 1
        if end - k > 1:
            block = U[:, k:end]
            order = sorted(range(end - k), key=lambda c: tuple(block[:, c]))
            # values stay ascending; within 1e-10 the pairing is immaterial
            U[:, k:end] = block[:, order]
        k = end
    return vals, U


def smallest_eigenpairs(L, R: int) -> SpectralBasis:
    """Dense symmetric eigendecomposition truncated to the ``R`` lowest pairs.

    The first entry of each eigenvector with magnitude above 1e-12 is made
    positive. Inside eigenvalue clusters narrower than 1e-10 the vectors are
    ordered lexicographically so repeated calls are bit-stable.
    """
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ValueError("Laplacian must be square")
    n = L.shape[0]
    R = int(R)
    if not 1 <= R <= n:
        raise ValueError(f"R must satisfy 1 <= R <= n (got R={R}, n={n})")
    scale = max(1.0, float(np.max(np.abs(L))) if L.size else 1.0)
    if np.max(np.abs(L - L.T)) > 1e-12 * scale:
        raise ValueError("Laplacian is not symmetric")
    vals, vecs = np.linalg.eigh(0.5 * (L + L.T))
    vecs = _fix_signs(np.array(vecs))
    vals, vecs = _order_clusters(np.array(vals), vecs)
    # a cluster straddling the cut would make the kept subspace ambiguous;
    # the ordering above is still deterministic, so truncate as-is
    values = np.ascontiguousarray(vals[:R])
    vectors = np.ascontiguousarray(vecs[:, :R])
    values.setflags(write=False)
    vectors.setflags(write=False)
    return SpectralBasis(values, vectors)


def gft(basis: SpectralBasis, f) -> np.ndarray:
    """Fourier coefficients ``U^T f`` (works column-wise for 2-d ``f``)."""
    f = np.asarray(f, dtype=float)
    if f.shape[0] != basis.n:
        raise ValueError(f"signal length {f.shape[0]} != basis size {basis.n}")
    return basis.vectors.T @ f


def igft(basis: SpectralBasis, alpha) -> np.ndarray:
    """Band-limited reconstruction ``U alpha``."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape[0] != basis.R:
        raise ValueError(f"coefficient length {alpha.shape[0]} != R={basis.R}")
    return basis.vectors @ alpha
