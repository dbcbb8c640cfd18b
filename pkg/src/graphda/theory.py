"""Numerical checks of the label-error bound and its supporting lemmas.

Everything here uses unnormalized Laplacians ``L = D - W``. The target
graph is split into layers by hop distance from the labeled set; the error
on layer ``q`` is controlled by the error on layer ``q - 1`` plus the
variation of the true and estimated labels across the edges joining them.
"""
from __future__ import annotations

from collections import deque
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .errors import UnreachableNodesError
from .graph import WeightMatrix, laplacian

TOL = 1e-8
LEMMA1_TOL = 1e-10


# ------------------------------------------------------------------ layers

@dataclass(frozen=True, eq=False)
class LayerDecomposition:
    """Nodes grouped by hop distance to the nearest labeled node."""

    hops: np.ndarray
    layers: tuple

    @property
    def Q(self) -> int:
        return len(self.layers) - 1

    @property
    def sizes(self) -> list[int]:
        return [int(layer.size) for layer in self.layers]


def layer_decomposition(W: WeightMatrix, labeled) -> LayerDecomposition:
    labeled = np.unique(np.asarray(labeled, dtype=np.int64))
    if labeled.size == 0:
        raise ValueError("labeled set is empty")
    nbrs = W.neighbor_lists()
    hops = np.full(W.n, -1, dtype=np.int64)
    hops[labeled] = 0
    queue = deque(labeled.tolist())
    while queue:
        i = queue.popleft()
        for j in nbrs[i]:
            if hops[j] < 0:
                hops[j] = hops[i] + 1
                queue.append(j)
    missing = np.flatnonzero(hops < 0)
    if missing.size:
        raise UnreachableNodesError(missing)
    Q = int(hops.max())
    layers = tuple(np.flatnonzero(hops == q) for q in range(Q + 1))
    hops.setflags(write=False)
    return LayerDecomposition(hops, layers)


@dataclass(frozen=True, eq=False)
class LayerStats:
    """Neighbor counts and weights between consecutive layers.

    Arrays are indexed by layer ``q = 0..Q``. ``k_min[0]`` is 0 and
    ``w_min_layers[0]`` is inf (layer 0 has no predecessor); ``k_max[Q]`` is 0.
    """

    k_min: np.ndarray
    k_max: np.ndarray
    w_min_layers: np.ndarray

    @property
    def w_min(self) -> float:
        return float(self.w_min_layers[1:].min()) if self.w_min_layers.size > 1 else float("inf")


def layer_stats(decomp: LayerDecomposition, W: WeightMatrix) -> LayerStats:
    Q = decomp.Q
    hops = decomp.hops
    n = W.n
    down = np.zeros(n, dtype=np.int64)  # neighbors one layer closer
    up = np.zeros(n, dtype=np.int64)    # neighbors one layer further
    w_min = np.full(Q + 1, np.inf)
    for i, j, w in zip(W.rows.tolist(), W.cols.tolist(), W.weights.tolist()):
        hi, hj = hops[i], hops[j]
        if hi == hj:
            continue
        near, far = (i, j) if hi < hj else (j, i)
        up[near] += 1
        down[far] += 1
        q = max(hi, hj)
        w_min[q] = min(w_min[q], w)
    k_min = np.zeros(Q + 1, dtype=np.int64)
    k_max = np.zeros(Q + 1, dtype=np.int64)
    for q, layer in enumerate(decomp.layers):
        if q >= 1:
            k_min[q] = down[layer].min()
        if q < Q:
            k_max[q] = up[layer].max()
    return LayerStats(k_min, k_max, w_min)


def compute_kappa(stats: LayerStats, decomp: LayerDecomposition) -> float:
    """Topology factor of the error bound, evaluated in exact rationals.

    kappa = sum_q (|I_q| / K_q^min) * (1 + sum_{l=1}^{q-1} prod_{m=l}^{q-1} |I_m| K_m^max / K_m^min)
    """
    Q = decomp.Q
    if Q < 1:
        raise ValueError("kappa needs at least one unlabeled layer (Q >= 1)")
    size = decomp.sizes
    ratio = [Fraction(0)] + [Fraction(size[m] * int(stats.k_max[m]), int(stats.k_min[m]))
                             for m in range(1, Q + 1)]
    total = Fraction(0)
    for q in range(1, Q + 1):
        # inner sum over l, accumulated from the right: prod_{m=l}^{q-1}
        inner, prod = Fraction(0), Fraction(1)
        for l in range(q - 1, 0, -1):
            prod *= ratio[l]
            inner += prod
        total += Fraction(size[q], int(stats.k_min[q])) * (1 + inner)
    return float(total)


# ------------------------------------------------------------------ lemmas

@dataclass(frozen=True)
class InequalityCheck:
    lhs: float
    rhs: float
    passed: bool


def _frob(a) -> float:
    return float(np.sqrt(np.sum(np.asarray(a, dtype=float) ** 2)))


def check_lemma1(alpha_s, alpha_t, lam_s, lam_t) -> InequalityCheck:
    """Energy gap of two band-limited signals from their spectral data.

    ``|sum lam_s a_s^2 - sum lam_t a_t^2| <= C^2 delta + 2 C lam_R Delta_alpha``.
    """
    a_s = np.asarray(alpha_s, dtype=float)
    a_t = np.asarray(alpha_t, dtype=float)
    ls = np.asarray(lam_s, dtype=float)
    lt = np.asarray(lam_t, dtype=float)
    if a_s.shape != a_t.shape or ls.shape != lt.shape or ls.size != a_s.shape[0]:
        raise ValueError("coefficient and eigenvalue shapes must agree")
    col = (slice(None),) + (None,) * (a_s.ndim - 1)
    e_s = float(np.sum(ls[col] * a_s**2))
    e_t = float(np.sum(lt[col] * a_t**2))
    C = max(_frob(a_s), _frob(a_t))
    delta = float(np.max(np.abs(ls - lt)))
    lam_R = float(max(ls.max(), lt.max()))
    d_alpha = _frob(a_s - a_t)
    lhs = abs(e_s - e_t)
    rhs = C**2 * delta + 2 * C * lam_R * d_alpha
    return InequalityCheck(float(lhs), float(rhs), bool(lhs <= rhs + LEMMA1_TOL))


@dataclass(frozen=True)
class ManifoldSpec:
    """Paired linear manifolds ``x^s = G_s gamma`` and ``x^t = G_t gamma``.

    ``A_l``/``A_u`` bound ``||G_t v|| / ||G_s v||`` over nonzero ``v``; the
    kernel is Gaussian with fixed width ``sigma`` in both domains.
    """

    G_s: np.ndarray
    G_t: np.ndarray
    M_s: float
    M_t: float
    A_l: float
    A_u: float
    sigma: float = 1.0
    box: tuple = (-1.0, 1.0)
    family: str = "linear"

    def __post_init__(self):
        if not (self.M_s > 0 and self.M_t > 0):
            raise ValueError("Lipschitz constants must be positive")
        if self.A_l > self.A_u:
            raise ValueError("A_l must not exceed A_u")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @property
    def d(self) -> int:
        return int(np.asarray(self.G_s).shape[1])

    @property
    def A(self) -> float:
        return max(abs(1 - self.A_l), abs(self.A_u - 1))

    @property
    def L_phi(self) -> float:
        """max |d/dr exp(-r^2 / sigma^2)|, attained at r = sigma / sqrt(2)."""
        return float(np.sqrt(2.0) * np.exp(-0.5) / self.sigma)

    @property
    def phi0(self) -> float:
        return 1.0

    def g_s(self, gamma) -> np.ndarray:
        return np.asarray(gamma, dtype=float) @ np.asarray(self.G_s).T

    def g_t(self, gamma) -> np.ndarray:
        return np.asarray(gamma, dtype=float) @ np.asarray(self.G_t).T

    @classmethod
    def linear(cls, G_s, G_t, sigma=1.0, box=(-1.0, 1.0)) -> "ManifoldSpec":
        """Constants from singular values; ``G_s`` needs full column rank."""
        G_s = np.asarray(G_s, dtype=float)
        G_t = np.asarray(G_t, dtype=float)
        chol = np.linalg.cholesky(G_s.T @ G_s)
        Li = np.linalg.inv(chol)
        gen = np.linalg.eigvalsh(Li @ G_t.T @ G_t @ Li.T)
        gen = np.sqrt(np.clip(gen, 0.0, None))
        return cls(G_s, G_t, float(np.linalg.norm(G_s, 2)), float(np.linalg.norm(G_t, 2)),
                   float(gen.min()), float(gen.max()), sigma, box)

    @classmethod
    def identity(cls, d=2, ambient=3, sigma=1.0) -> "ManifoldSpec":
        G = np.eye(ambient, d)
        return cls(G, G.copy(), 1.0, 1.0, 1.0, 1.0, sigma, family="identity")

    @classmethod
    def rotation(cls, angle_deg=90.0, d=2, ambient=3, sigma=1.0) -> "ManifoldSpec":
        G = np.eye(ambient, d)
        th = np.deg2rad(angle_deg)
        Qm = np.eye(ambient)
        # rotate the plane spanned by the first and last ambient axes
        Qm[0, 0] = Qm[-1, -1] = np.cos(th)
        Qm[0, -1], Qm[-1, 0] = -np.sin(th), np.sin(th)
        return cls(G, Qm @ G, 1.0, 1.0, 1.0, 1.0, sigma, family="rotation")

    @classmethod
    def scale(cls, c=1.5, d=2, ambient=3, sigma=1.0) -> "ManifoldSpec":
        if not c > 0:
            raise ValueError("scale factor must be positive")
        G = np.eye(ambient, d)
        return cls(G, c * G, 1.0, float(c), float(c), float(c), sigma, family="scale")

    def to_dict(self) -> dict:
        return {"family": self.family, "d": self.d, "sigma": self.sigma,
                "M_s": self.M_s, "M_t": self.M_t, "A_l": self.A_l, "A_u": self.A_u,
                "A": self.A, "L_phi": self.L_phi, "phi0": self.phi0}


@dataclass(frozen=True)
class Lemma2Report:
    delta_observed: float
    rho_max: float
    Delta_W: float
    eps_Gamma: float
    passed: bool
    beta_s: np.ndarray = field(repr=False)
    beta_t: np.ndarray = field(repr=False)
    K_s: np.ndarray = field(repr=False)
    K_t: np.ndarray = field(repr=False)


def edge_parameter_radius(gamma, *graphs) -> float:
    """Largest parameter-space distance across any edge of the given graphs."""
    g = np.asarray(gamma, dtype=float)
    eps = 0.0
    for W in graphs:
        if W.edge_count:
            diff = g[W.rows] - g[W.cols]
            eps = max(eps, float(np.sqrt(np.max(np.einsum("ij,ij->i", diff, diff)))))
    return eps


def neighbour_overlap(W_s: WeightMatrix, W_t: WeightMatrix):
    """Per node: neighbor counts and the fraction shared with the other graph."""
    ns = [set(x) for x in W_s.neighbor_lists()]
    nt = [set(x) for x in W_t.neighbor_lists()]
    K_s = np.array([len(a) for a in ns], dtype=np.int64)
    K_t = np.array([len(b) for b in nt], dtype=np.int64)
    common = np.array([len(a & b) for a, b in zip(ns, nt)], dtype=np.int64)
    with np.errstate(invalid="ignore", divide="ignore"):
        beta_s = np.where(K_s > 0, common / np.maximum(K_s, 1), 1.0)
        beta_t = np.where(K_t > 0, common / np.maximum(K_t, 1), 1.0)
    return K_s, K_t, beta_s, beta_t


def check_lemma2(spec: ManifoldSpec, gamma, W_s: WeightMatrix, W_t: WeightMatrix) -> Lemma2Report:
    """Eigenvalue deviation between paired-sample graphs.

    Both graphs must carry Gaussian weights of width ``spec.sigma`` on the
    points ``g_s(gamma)`` and ``g_t(gamma)``.
    """
    if W_s.n != W_t.n or np.asarray(gamma).shape[0] != W_s.n:
        raise ValueError("paired graphs must share the node set")
    K_s, K_t, beta_s, beta_t = neighbour_overlap(W_s, W_t)
    eps = edge_parameter_radius(gamma, W_s, W_t)
    Delta_W = spec.L_phi * (spec.A * spec.M_s + spec.M_s + spec.M_t) * eps
    per_node = 2 * (beta_s * K_s * Delta_W + (1 - beta_s) * K_s * spec.phi0
                    + (1 - beta_t) * K_t * spec.phi0)
    rho = float(per_node.max())
    ev_s = np.linalg.eigvalsh(laplacian(W_s))
    ev_t = np.linalg.eigvalsh(laplacian(W_t))
    delta = float(np.max(np.abs(ev_s - ev_t)))
    return Lemma2Report(delta, rho, float(Delta_W), eps, bool(delta <= rho + TOL),
                        beta_s, beta_t, K_s, K_t)


@dataclass(frozen=True)
class LayerCheck:
    q: int
    lhs: float
    rhs: float
    passed: bool
    B_q: float
    B_hat_q: float


def _rows(f, n):
    f = np.asarray(f, dtype=float)
    f = f[:, None] if f.ndim == 1 else f
    if f.shape[0] != n:
        raise ValueError("signal length must equal node count")
    return f


def between_layer_variation(W: WeightMatrix, f, hops, q) -> float:
    """sum of W_ij ||f_i - f_j||^2 over edges joining layers q-1 and q."""
    hi, hj = hops[W.rows], hops[W.cols]
    sel = ((hi == q) & (hj == q - 1)) | ((hi == q - 1) & (hj == q))
    d = f[W.rows[sel]] - f[W.cols[sel]]
    return float(np.sum(W.weights[sel] * np.sum(d * d, axis=1)))


def clamp_to_labels(f_hat, f, labeled) -> np.ndarray:
    out = np.array(f_hat, dtype=float, copy=True)
    idx = np.asarray(labeled, dtype=np.int64)
    out[idx] = np.asarray(f, dtype=float)[idx]
    return out


def check_lemma3(W: WeightMatrix, f, f_hat, decomp: LayerDecomposition,
                 stats: LayerStats) -> list[LayerCheck]:
    """Per-layer error recursion; ``f_hat`` is first clamped to ``f`` on layer 0."""
    f = _rows(f, W.n)
    fh = clamp_to_labels(_rows(f_hat, W.n), f, decomp.layers[0])
    err = np.sum((fh - f) ** 2, axis=1)
    out = []
    for q in range(1, decomp.Q + 1):
        B_q = between_layer_variation(W, f, decomp.hops, q)
        Bh_q = between_layer_variation(W, fh, decomp.hops, q)
        w = float(stats.w_min_layers[q])
        lhs = float(err[decomp.layers[q]].sum())
        prev = float(np.sqrt(err[decomp.layers[q - 1]].sum()))
        root = np.sqrt(B_q / w) + np.sqrt(Bh_q / w) + np.sqrt(stats.k_max[q - 1]) * prev
        rhs = decomp.sizes[q] / int(stats.k_min[q]) * root**2
        out.append(LayerCheck(q, lhs, float(rhs), bool(lhs <= rhs + TOL), B_q, Bh_q))
    return out


# ------------------------------------------------------------------ theorem

@dataclass(frozen=True, eq=False)
class TheoryInstance:
    """Inputs of one bound evaluation.

    ``values_*`` are the first ``R`` eigenvalues of the unnormalized
    Laplacians whose eigenvectors ``vectors_*`` produced ``alpha_*``.
    """

    spec: ManifoldSpec
    gamma: np.ndarray
    W_s: WeightMatrix
    W_t: WeightMatrix
    f_s: np.ndarray
    f_t: np.ndarray
    labeled_t: np.ndarray
    vectors_s: np.ndarray
    vectors_t: np.ndarray
    values_s: np.ndarray
    values_t: np.ndarray
    alpha_s: np.ndarray
    alpha_t: np.ndarray


@dataclass(frozen=True)
class BoundReport:
    Q: int
    layer_sizes: list
    error: float
    bound: float
    recursive_bound: float
    kappa: float
    w_min: float
    B: float
    B_hat: float
    energy_hat_t: float
    hypothesis_ok: bool
    delta: float
    delta_full: float
    rho_max: float
    Delta_W: float
    eps_Gamma: float
    Delta_alpha: float
    C: float
    lambda_R: float
    lemma1: InequalityCheck
    lemma2_passed: bool
    lemma3: list
    passed: bool
    k_min: list = field(default_factory=list)
    k_max: list = field(default_factory=list)
    w_min_layers: list = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return (self.passed and self.lemma1.passed and self.lemma2_passed
                and all(c.passed for c in self.lemma3))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["all_passed"] = self.all_passed
        return d


def _energy(L, f) -> float:
    f = np.asarray(f, dtype=float)
    f = f[:, None] if f.ndim == 1 else f
    return float(np.sum(f * (L @ f)))


def _inf_to_none(x):
    return None if not np.isfinite(x) else float(x)


def theorem1_bound(inst: TheoryInstance) -> BoundReport:
    """Evaluate the target error bound and every lemma on one instance.

    The estimated source signal ``U_s alpha_s`` stands in for ``f_s`` in
    ``B_hat``. ``hypothesis_ok`` reports whether the clamped target
    estimate actually has energy at most ``B_hat``. ``recursive_bound``
    chains the per-layer inequality directly and holds unconditionally.
    """
    n = inst.W_t.n
    f_t = _rows(inst.f_t, n)
    fh_s = inst.vectors_s @ inst.alpha_s
    fh_t = clamp_to_labels(_rows(inst.vectors_t @ inst.alpha_t, n), f_t, inst.labeled_t)
    L_s, L_t = laplacian(inst.W_s), laplacian(inst.W_t)

    decomp = layer_decomposition(inst.W_t, inst.labeled_t)
    stats = layer_stats(decomp, inst.W_t)
    lem1 = check_lemma1(inst.alpha_s, inst.alpha_t, inst.values_s, inst.values_t)
    lem2 = check_lemma2(inst.spec, inst.gamma, inst.W_s, inst.W_t)

    a_s = np.asarray(inst.alpha_s, dtype=float)
    a_t = np.asarray(inst.alpha_t, dtype=float)
    C = max(_frob(a_s), _frob(a_t))
    d_alpha = _frob(a_s - a_t)
    lam_R = float(max(np.max(inst.values_s), np.max(inst.values_t)))
    delta = float(np.max(np.abs(np.asarray(inst.values_s) - np.asarray(inst.values_t))))
    B = _energy(L_t, f_t)
    B_hat = _energy(L_s, fh_s) + C**2 * lem2.rho_max + 2 * C * lam_R * d_alpha
    energy_t = _energy(L_t, fh_t)
    error = float(np.sum((fh_t - f_t) ** 2))

    if decomp.Q == 0:
        kappa, w_min, bound, rec, lem3 = 0.0, float("inf"), 0.0, 0.0, []
    else:
        kappa = compute_kappa(stats, decomp)
        w_min = stats.w_min
        bound = kappa / w_min * (np.sqrt(B) + np.sqrt(B_hat)) ** 2
        lem3 = check_lemma3(inst.W_t, f_t, fh_t, decomp, stats)
        # chain the layer inequality with global B, B_hat in place of B_q, B_hat_q
        s = (np.sqrt(B) + np.sqrt(max(B_hat, energy_t))) / np.sqrt(w_min)
        e_prev, rec = 0.0, 0.0
        for q in range(1, decomp.Q + 1):
            e_q = np.sqrt(decomp.sizes[q] / stats.k_min[q]) * (s + np.sqrt(stats.k_max[q - 1]) * e_prev)
            rec += e_q**2
            e_prev = e_q
    return BoundReport(
        Q=decomp.Q, layer_sizes=decomp.sizes, error=error, bound=float(bound),
        recursive_bound=float(rec), kappa=kappa, w_min=_inf_to_none(w_min) if decomp.Q else None,
        B=B, B_hat=float(B_hat), energy_hat_t=energy_t, hypothesis_ok=bool(energy_t <= B_hat + TOL),
        delta=delta, delta_full=lem2.delta_observed, rho_max=lem2.rho_max, Delta_W=lem2.Delta_W,
        eps_Gamma=lem2.eps_Gamma, Delta_alpha=d_alpha, C=C, lambda_R=lam_R,
        lemma1=lem1, lemma2_passed=lem2.passed, lemma3=lem3,
        passed=bool(error <= bound + TOL),
        k_min=stats.k_min.tolist(), k_max=stats.k_max.tolist(),
        w_min_layers=[_inf_to_none(w) for w in stats.w_min_layers],
    )
