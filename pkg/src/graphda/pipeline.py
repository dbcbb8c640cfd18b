"""Fixed-graph SDA and the alternating graph-learning loop (SDA-DAGL).

Each DAGL iteration recomputes normalized Laplacians and their reduced
bases, solves for the coefficients, re-estimates both weight matrices by LP
and prunes weak edges. After the last iteration the bases and coefficients
are refreshed once more on the learned graphs, and that refit gives the
returned estimates.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .data import HeldOut, Metrics, misclassification_rate
from .errors import DisconnectedComponentError
from .graph import (WeightMatrix, build_knn_graph, degree_vector, normalized_laplacian,
                    prune_edges, unlabeled_components)
from .linprog import solve_lp
from .sda import CoefficientPair, LabelProblem, predict_labels, solve_coefficients
from .spectral import SpectralBasis, smallest_eigenpairs
from .weights import learn_weights


def load_defaults() -> dict:
    text = resources.files("graphda").joinpath("defaults.json").read_text()
    return json.loads(text)["dagl"]


@dataclass(frozen=True)
class DaglConfig:
    """Hyperparameters of both methods.

    ``d_max`` is absolute when given; otherwise it is ``d_max_scale`` times
    the mean degree of the initial k-NN graph, computed per domain.
    """

    mu: float
    mu_s: float
    mu_t: float
    R: int
    K: int
    sigma: object = "auto"
    w_min: float = 0.0
    d_min: float = 0.5
    d_max: float | None = None
    d_max_scale: float = 1.0
    max_iterations: int = 5
    seed: int = 0

    def __post_init__(self):
        for name in ("mu", "mu_s", "mu_t"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if int(self.R) < 1:
            raise ValueError("R must be at least 1")
        if int(self.K) < 1:
            raise ValueError("K must be at least 1")
        if self.sigma != "auto" and not float(self.sigma) > 0:
            raise ValueError("sigma must be positive or 'auto'")
        if not 0 <= self.w_min < 1:
            raise ValueError("w_min must lie in [0, 1)")
        if not self.d_min > 0:
            raise ValueError("d_min must be positive")
        if self.d_max is not None and not self.d_max >= self.d_min:
            raise ValueError("d_max must be >= d_min")
        if not self.d_max_scale > 0:
            raise ValueError("d_max_scale must be positive")
        if int(self.max_iterations) < 1:
            raise ValueError("max_iterations must be at least 1")

    @classmethod
    def from_dict(cls, values: dict) -> "DaglConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(values) - names)
        if unknown:
            raise ValueError(f"unknown config keys: {unknown}")
        return cls(**values)

    @classmethod
    def defaults(cls, **overrides) -> "DaglConfig":
        return cls.from_dict({**load_defaults(), **overrides})

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> "DaglConfig":
        return dataclasses.replace(self, **changes)

    def degree_cap(self, W: WeightMatrix) -> float:
        if self.d_max is not None:
            return float(self.d_max)
        mean_degree = float(np.mean(degree_vector(W)))
        return max(self.d_min, self.d_max_scale * mean_degree)


@dataclass(frozen=True)
class IterationRecord:
    sda_objective: float
    lp_objective_source: float
    lp_objective_target: float
    edges_source: int
    edges_target: int


@dataclass(frozen=True, eq=False)
class DaglResult:
    W_source: WeightMatrix
    W_target: WeightMatrix
    coefficients: CoefficientPair
    f_source: np.ndarray
    f_target: np.ndarray
    predictions: np.ndarray
    trace: tuple = ()
    metrics: Metrics | None = None
    basis_source: SpectralBasis | None = field(default=None, repr=False)
    basis_target: SpectralBasis | None = field(default=None, repr=False)

    @property
    def error(self) -> float:
        return float("nan") if self.metrics is None else self.metrics.rate


def _check_labeled(W, labeled, domain):
    lost = unlabeled_components(W, labeled)
    if lost:
        raise DisconnectedComponentError(lost, domain)


def _fit(problem, config, Ws, Wt):
    if config.R > min(problem.n_source, problem.n_target):
        raise ValueError(f"R={config.R} exceeds the smaller domain size")
    Us = smallest_eigenpairs(normalized_laplacian(Ws), config.R)
    Ut = smallest_eigenpairs(normalized_laplacian(Wt), config.R)
    coef = solve_coefficients(Us, Ut, problem.source_labeled, problem.target_labeled,
                              problem.source_onehot(), problem.target_onehot(), config.mu)
    return Us, Ut, coef


def _initial_graphs(problem, config):
    Ws = build_knn_graph(problem.source_points, config.K, config.sigma)
    Wt = build_knn_graph(problem.target_points, config.K, config.sigma)
    _check_labeled(Ws, problem.source_labeled, "source")
    _check_labeled(Wt, problem.target_labeled, "target")
    return Ws, Wt


def _result(problem, Ws, Wt, Us, Ut, coef, trace, held_out):
    fs = Us.vectors @ coef.source
    ft = Ut.vectors @ coef.target
    pred = predict_labels(Ut, coef.target)
    metrics = None
    if held_out is not None and held_out.indices.size:
        truth = -np.ones(problem.n_target, dtype=np.int64)
        truth[held_out.indices] = held_out.classes
        metrics = misclassification_rate(pred, truth, held_out.indices)
    return DaglResult(Ws, Wt, coef, fs, ft, pred, tuple(trace), metrics, Us, Ut)


def run_sda(problem: LabelProblem, config: DaglConfig,
            held_out: HeldOut | None = None) -> DaglResult:
    """Baseline: one coefficient solve on the initial k-NN graphs."""
    Ws, Wt = _initial_graphs(problem, config)
    Us, Ut, coef = _fit(problem, config, Ws, Wt)
    return _result(problem, Ws, Wt, Us, Ut, coef, [], held_out)


def run_sda_dagl(problem: LabelProblem, config: DaglConfig,
                 held_out: HeldOut | None = None, lp_solver=None) -> DaglResult:
    """Alternate coefficient and graph updates for ``config.max_iterations`` rounds.

    Raises DisconnectedComponentError when pruning leaves a component of
    either graph without labels.
    """
    solver = lp_solver or solve_lp
    Ws, Wt = _initial_graphs(problem, config)
    cap_s, cap_t = config.degree_cap(Ws), config.degree_cap(Wt)
    trace = []
    for _ in range(int(config.max_iterations)):
        Us, Ut, coef = _fit(problem, config, Ws, Wt)
        fs = Us.vectors @ coef.source
        ft = Ut.vectors @ coef.target
        Ws, _, sol_s = learn_weights(problem.source_points, Ws, fs, config.mu_s,
                                     config.d_min, cap_s, solver)
        Wt, _, sol_t = learn_weights(problem.target_points, Wt, ft, config.mu_t,
                                     config.d_min, cap_t, solver)
        Ws = prune_edges(Ws, config.w_min)
        Wt = prune_edges(Wt, config.w_min)
        _check_labeled(Ws, problem.source_labeled, "source")
        _check_labeled(Wt, problem.target_labeled, "target")
        trace.append(IterationRecord(coef.objective, sol_s.objective, sol_t.objective,
                                     Ws.edge_count, Wt.edge_count))
    Us, Ut, coef = _fit(problem, config, Ws, Wt)
    return _result(problem, Ws, Wt, Us, Ut, coef, trace, held_out)


METHODS = {"sda": run_sda, "sda-dagl": run_sda_dagl}
