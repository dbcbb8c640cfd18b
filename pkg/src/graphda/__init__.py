"""Graph domain adaptation with learned graph topologies."""

__version__ = "0.1.0"

from .data import SyntheticConfig, generate_synthetic, mask_labels, misclassification_rate
from .graph import WeightMatrix, build_knn_graph, laplacian, normalized_laplacian
from .pipeline import DaglConfig, DaglResult, run_sda, run_sda_dagl
from .sda import LabelProblem, solve_coefficients
from .spectral import SpectralBasis, smallest_eigenpairs
from .theory import ManifoldSpec, theorem1_bound

__all__ = [
    "DaglConfig", "DaglResult", "LabelProblem", "ManifoldSpec", "SpectralBasis",
    "SyntheticConfig", "WeightMatrix", "build_knn_graph", "generate_synthetic",
    "laplacian", "mask_labels", "misclassification_rate", "normalized_laplacian",
    "run_sda", "run_sda_dagl", "smallest_eigenpairs", "solve_coefficients", "theorem1_bound",
]
