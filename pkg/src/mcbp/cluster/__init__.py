from .hdbscan import CondensedTree, hdbscan, hdbscan_fit
from .kmeans import kmeans, kmeans_pp, kmeans_pp_init
from .result import ClusteringResult
from .strategies import (
    hdbscan_best_mcs,
    hdbscan_s_centroids,
    hybrid_hdbscan_1nn,
    propagate_labels_1nn,
    s_centroid_init,
)

__all__ = [
    "ClusteringResult",
    "CondensedTree",
    "hdbscan",
    "hdbscan_best_mcs",
    "hdbscan_fit",
    "hdbscan_s_centroids",
    "hybrid_hdbscan_1nn",
    "kmeans",
    "kmeans_pp",
    "kmeans_pp_init",
    "propagate_labels_1nn",
    "s_centroid_init",
]
