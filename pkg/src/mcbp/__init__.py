"""Mean-curvature boundary points (MCBP) for point clouds, plus the
curvature-filtered clustering protocols built on top of them."""

__version__ = "0.1.0"

from .curvature import CurvatureReport, mcbp, mean_curvature_at, normalize_scores, percentile_threshold, raw_curvature_scores
from .data import Dataset, load_csv, load_iris, preprocess, standardize, write_csv
from .errors import MCBPError
from .filter import Partition, curvature_filter, partition
from .knn import NeighborGraph, build_knn_graph, default_k
from .laplacian import laplacian_curvature_scores
from .metrics import IndexScores, evaluate

__all__ = [
    "CurvatureReport",
    "Dataset",
    "IndexScores",
    "MCBPError",
    "NeighborGraph",
    "Partition",
    "__version__",
    "build_knn_graph",
    "curvature_filter",
    "default_k",
    "evaluate",
    "laplacian_curvature_scores",
    "load_csv",
    "load_iris",
    "mcbp",
    "mean_curvature_at",
    "normalize_scores",
    "partition",
    "percentile_threshold",
    "preprocess",
    "raw_curvature_scores",
    "standardize",
    "write_csv",
]
