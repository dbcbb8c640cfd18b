"""Spectral coefficient matching on fixed graphs.

Source and target label functions are represented in reduced Fourier bases,
``f_s = U_s a_s`` and ``f_t = U_t a_t``, and the coefficients minimise

    ||S_s U_s a_s - y_s||^2 + ||S_t U_t a_t - y_t||^2 + mu ||a_s - a_t||^2

where ``S`` restricts to labeled nodes. Several classes are handled as
one-hot columns sharing the same bases.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularSystemError
from .spectral import SpectralBasis

COND_LIMIT = 1e12


def one_hot(classes, n_classes: int) -> np.ndarray:
    classes = np.asarray(classes, dtype=np.int64)
    Y = np.zeros((classes.size, n_classes))
    Y[np.arange(classes.size), classes] = 1.0
    return Y


def _index_set(idx, n, name):
    idx = np.asarray(idx, dtype=np.int64).ravel()
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise ValueError(f"{name} index out of range")
    if np.any(np.diff(idx) <= 0):
        raise ValueError(f"{name} indices must be sorted and unique")
    return idx


@dataclass(frozen=True, eq=False)
class LabelProblem:
    """Two-domain sample sets with the labels that are available.

    Labels are stored as class ids for the labeled indices only; use
    :meth:`source_onehot` / :meth:`target_onehot` for the one-hot rows.
    """

    source_points: np.ndarray
    target_points: np.ndarray
    n_classes: int
    source_labeled: np.ndarray
    source_classes: np.ndarray
    target_labeled: np.ndarray
    target_classes: np.ndarray

    def __post_init__(self):
        xs = np.atleast_2d(np.asarray(self.source_points, dtype=float))
        xt = np.atleast_2d(np.asarray(self.target_points, dtype=float))
        if xs.shape[1] != xt.shape[1]:
            raise ValueError("source and target feature dimensions differ")
        ls = _index_set(self.source_labeled, xs.shape[0], "source")
        lt = _index_set(self.target_labeled, xt.shape[0], "target")
        cs = np.asarray(self.source_classes, dtype=np.int64).ravel()
        ct = np.asarray(self.target_classes, dtype=np.int64).ravel()
        if cs.size != ls.size or ct.size != lt.size:
            raise ValueError("one class id is required per labeled index")
        if ls.size < 1 or lt.size < 1:
            raise ValueError("each domain needs at least one label")
        k = int(self.n_classes)
        if k < 2:
            raise ValueError("at least two classes are required")
        for c in (cs, ct):
            if c.size and (c.min() < 0 or c.max() >= k):
                raise ValueError("class id out of range")
        for name, val in [("source_points", xs), ("target_points", xt),
                          ("source_labeled", ls), ("source_classes", cs),
                          ("target_labeled", lt), ("target_classes", ct)]:
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "n_classes", k)

    @property
    def n_source(self) -> int:
        return self.source_points.shape[0]

    @property
    def n_target(self) -> int:
        return self.target_points.shape[0]

    def source_onehot(self) -> np.ndarray:
        return one_hot(self.source_classes, self.n_classes)

    def target_onehot(self) -> np.ndarray:
        return one_hot(self.target_classes, self.n_classes)

    def target_unlabeled(self) -> np.ndarray:
        mask = np.ones(self.n_target, dtype=bool)
        mask[self.target_labeled] = False
        return np.flatnonzero(mask)


@dataclass(frozen=True)
class CoefficientPair:
    source: np.ndarray
    target: np.ndarray
    objective: float = field(default=float("nan"))


def _as_columns(y):
    y = np.asarray(y, dtype=float)
    return (y[:, None], True) if y.ndim == 1 else (y, False)


def sda_objective(Us, Ut, ls, lt, ys, yt, mu, a_s, a_t) -> float:
    """Value of the coupled least-squares objective (summed over columns)."""
    Us = Us.vectors if isinstance(Us, SpectralBasis) else np.asarray(Us)
    Ut = Ut.vectors if isinstance(Ut, SpectralBasis) else np.asarray(Ut)
    rs = Us[np.asarray(ls)] @ a_s - ys
    rt = Ut[np.asarray(lt)] @ a_t - yt
    return float(np.sum(rs**2) + np.sum(rt**2) + mu * np.sum((a_s - a_t) ** 2))


def sda_gradient(Us, Ut, ls, lt, ys, yt, mu, a_s, a_t):
    Us = Us.vectors if isinstance(Us, SpectralBasis) else np.asarray(Us)
    Ut = Ut.vectors if isinstance(Ut, SpectralBasis) else np.asarray(Ut)
    Ps, Pt = Us[np.asarray(ls)], Ut[np.asarray(lt)]
    gs = 2 * Ps.T @ (Ps @ a_s - ys) + 2 * mu * (a_s - a_t)
    gt = 2 * Pt.T @ (Pt @ a_t - yt) - 2 * mu * (a_s - a_t)
    return gs, gt


def solve_coefficients(Us: SpectralBasis, Ut: SpectralBasis, ls, lt, ys, yt,
                       mu: float) -> CoefficientPair:
    """Closed-form minimiser of the coupled objective.

    Parameters
    ----------
    Us, Ut : SpectralBasis
        Reduced source/target bases with the same ``R``.
    ls, lt : array of int
        Labeled node indices in each domain.
    ys, yt : array
        Labels at those indices, a vector or one column per class.
    mu : float
        Coupling weight on ``||a_s - a_t||^2``.

    Returns
    -------
    CoefficientPair
        ``R``-vectors (or ``R x C`` matrices when ``ys`` is 2-d).

    Raises
    ------
    SingularSystemError
        When the condition number of the reduced system exceeds 1e12.
    """
    if not mu > 0:
        raise ValueError("mu must be positive")
    if Us.R != Ut.R:
        raise ValueError(f"basis sizes differ: {Us.R} vs {Ut.R}")
    ys, squeeze = _as_columns(ys)
    yt, _ = _as_columns(yt)
    Ps = Us.vectors[np.asarray(ls, dtype=np.int64)]
    Pt = Ut.vectors[np.asarray(lt, dtype=np.int64)]
    if Ps.shape[0] != ys.shape[0] or Pt.shape[0] != yt.shape[0]:
        raise ValueError("label rows do not match labeled index sets")

    As, At = Ps.T @ Ps, Pt.T @ Pt
    bs, bt = Ps.T @ ys, Pt.T @ yt
    M = At @ As / mu + At + As
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularSystemError(cond)
    a_s = np.linalg.solve(M, At @ bs / mu + bs + bt)
    a_t = As @ a_s / mu + a_s - bs / mu

    obj = sda_objective(Us, Ut, ls, lt, ys, yt, mu, a_s, a_t)
    if squeeze:
        a_s, a_t = a_s[:, 0], a_t[:, 0]
    return CoefficientPair(a_s, a_t, obj)


def predict_labels(basis: SpectralBasis, alpha) -> np.ndarray:
    """Class per node: argmax over columns of ``U alpha`` (lowest index wins ties)."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.ndim != 2 or alpha.shape[1] < 2:
        raise ValueError("alpha must be R x C with C >= 2 (one column per class)")
    if alpha.shape[0] != basis.R:
        raise ValueError("alpha rows must equal the basis size")
    return np.argmax(basis.vectors @ alpha, axis=1)
