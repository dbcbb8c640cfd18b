"""Benchmark and bound-instance builders shared by the CLI and the tests."""
from __future__ import annotations

import numpy as np

from .data import (HeldOut, SyntheticConfig, generate_paired_manifolds, generate_synthetic,
                   make_rng, mask_labels, subsample_target)
from .graph import build_knn_graph, connected_components, laplacian
from .pipeline import METHODS, DaglConfig
from .sda import LabelProblem, one_hot, solve_coefficients
from .spectral import smallest_eigenpairs
from .theory import ManifoldSpec, TheoryInstance


def benchmark_problem(seed: int, n_labels: int = 40, n_target: int | None = None,
                      synthetic: SyntheticConfig | None = None) -> tuple[LabelProblem, HeldOut]:
    """Synthetic problem for one seed: optional target subsample, then label mask."""
    base = synthetic or SyntheticConfig()
    problem = generate_synthetic(SyntheticConfig(base.n_per_domain, base.offset, base.std,
                                                 base.rotation_deg, seed))
    if n_target is not None:
        problem = subsample_target(problem, n_target, seed)
    return mask_labels(problem, keep_count=n_labels, seed=seed)


def run_method(method: str, problem: LabelProblem, config: DaglConfig, held: HeldOut):
    try:
        fn = METHODS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(METHODS)}") from None
    return fn(problem, config, held)


FAMILIES = ("identity", "rotation", "scale")


def manifold_family(name: str, c: float = 1.5, sigma: float = 0.5, angle: float = 90.0) -> ManifoldSpec:
    if name == "identity":
        return ManifoldSpec.identity(sigma=sigma)
    if name == "rotation":
        return ManifoldSpec.rotation(angle, sigma=sigma)
    if name == "scale":
        return ManifoldSpec.scale(c, sigma=sigma)
    raise ValueError(f"unknown family {name!r}; choose from {FAMILIES}")


def _label_every_component(W, labeled):
    comp = connected_components(W)
    have = set(comp[labeled].tolist())
    extra = [int(np.flatnonzero(comp == c)[0]) for c in np.unique(comp) if c not in have]
    return np.unique(np.concatenate([labeled, np.array(extra, dtype=np.int64)]))


def theory_instance(spec: ManifoldSpec, N: int, seed: int, K: int = 8, R: int = 5,
                    label_ratio: float = 0.2, mu: float = 1.0) -> TheoryInstance:
    """Paired-manifold instance with a two-class label ``gamma_0 > 0``.

    The source is fully labeled; a stratified ``label_ratio`` share of the
    target is labeled, plus the lowest node of any component left without
    a label. Coefficients come from unnormalized-Laplacian bases.
    """
    sample = generate_paired_manifolds(spec, N, seed)
    W_s = build_knn_graph(sample.x_s, K, sigma=spec.sigma)
    W_t = build_knn_graph(sample.x_t, K, sigma=spec.sigma)
    classes = (sample.gamma[:, 0] > 0).astype(np.int64)
    f = one_hot(classes, 2)

    rng = make_rng(seed + 1)
    keep = max(2, int(round(label_ratio * N)))
    perm = rng.permutation(N)
    first = [int(perm[np.flatnonzero(classes[perm] == c)[0]]) for c in np.unique(classes)]
    rest = [int(p) for p in perm if p not in first][: max(0, keep - len(first))]
    labeled = _label_every_component(W_t, np.array(sorted(first + rest), dtype=np.int64))

    U_s = smallest_eigenpairs(laplacian(W_s), R)
    U_t = smallest_eigenpairs(laplacian(W_t), R)
    src = np.arange(N)
    coef = solve_coefficients(U_s, U_t, src, labeled, f, f[labeled], mu)
    return TheoryInstance(spec, sample.gamma, W_s, W_t, f, f, labeled,
                          np.asarray(U_s.vectors), np.asarray(U_t.vectors),
                          np.asarray(U_s.values), np.asarray(U_t.values),
                          coef.source, coef.target)
