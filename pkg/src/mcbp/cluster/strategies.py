"""Clustering strategies that use the smooth/boundary split."""

from __future__ import annotations

import numpy as np

from ..errors import (
    InsufficientSmoothPointsError,
    NoValidClusteringError,
    ParameterError,
    PropagationError,
    UndefinedIndexError,
)
from ..metrics import silhouette
from .hdbscan import hdbscan
from .kmeans import kmeans, kmeans_pp
from .result import ClusteringResult

MCS_CANDIDATES = (5, 10, 20)


def _points(data):
    return np.asarray(getattr(data, "features", data), dtype=float)


def hdbscan_best_mcs(data, candidates=MCS_CANDIDATES):
    """Run HDBSCAN for each ``min_cluster_size`` and keep the best silhouette.

    Silhouette ignores noise. Candidates that are too large for the data or
    give fewer than two clusters are skipped; ties go to the smaller value.
    Returns ``(result, chosen_mcs)``.
    """
    x = _points(data)
    scored = {}
    best = None
    for mcs in sorted(set(int(c) for c in candidates)):
        if len(x) < 2 * mcs:
            continue
        res = hdbscan(x, mcs)
        try:
            sc = silhouette(x, res.labels)
        except UndefinedIndexError:
            continue
        scored[mcs] = sc
        if best is None or sc > best[2]:
            best = (res, mcs, sc)
    if best is None:
        raise NoValidClusteringError(f"no min_cluster_size in {sorted(candidates)} yields two or more clusters")
    res, mcs, sc = best
    assert all(sc >= v for v in scored.values())
    meta = dict(res.meta, silhouette_by_mcs=scored, chosen_mcs=mcs)
    return ClusteringResult(res.labels, res.centroids, res.n_clusters, res.iterations, res.inertia, res.converged, meta), mcs


def s_centroid_init(full_data, partition, c: int, rng_seed=0, max_iter: int = 300, tol: float = 1e-6):
    """k-means on the full data, seeded with the converged k-means++ centroids of S."""
    x = _points(full_data)
    smooth = x[partition.smooth_indices]
    if len(smooth) < c:
        raise InsufficientSmoothPointsError(f"smooth set has {len(smooth)} points, need at least {c}")
    on_s = kmeans_pp(smooth, c, rng_seed, max_iter=max_iter, tol=tol)
    res = kmeans(x, on_s.centroids, max_iter=max_iter, tol=tol)
    res.meta["s_centroids"] = on_s.centroids.tolist()
    res.meta["s_iterations"] = on_s.iterations
    return res


def cluster_means(points, labels) -> np.ndarray:
    """Mean of the non-noise members of each cluster, in label order."""
    ids = np.unique(labels[labels >= 0])
    return np.array([points[labels == j].mean(axis=0) for j in ids])


def hdbscan_s_centroids(full_data, partition, mcs_candidates=MCS_CANDIDATES, rng_seed=None,
                        max_iter: int = 300, tol: float = 1e-6):
    """k-means on the full data seeded with the HDBSCAN cluster means of S.

    The number of clusters is whatever HDBSCAN finds on S. ``rng_seed`` is
    accepted for a uniform strategy signature; the procedure is deterministic.
    """
    x = _points(full_data)
    smooth = x[partition.smooth_indices]
    on_s, mcs = hdbscan_best_mcs(smooth, mcs_candidates)
    if on_s.n_clusters < 2:
        raise NoValidClusteringError("HDBSCAN found fewer than two clusters in the smooth set")
    centres = cluster_means(smooth, on_s.labels)
    res = kmeans(x, centres, max_iter=max_iter, tol=tol)
    res.meta.update(chosen_mcs=mcs, hdbscan_centroids=centres.tolist())
    return res


def propagate_labels_1nn(smooth_data, smooth_labels, boundary_data) -> np.ndarray:
    """Label each boundary point like its nearest non-noise smooth point (ties: lower index)."""
    s = _points(smooth_data)
    lab = np.asarray(smooth_labels, dtype=int)
    b = _points(boundary_data)
    if len(s) != len(lab):
        raise ParameterError(f"{len(lab)} labels for {len(s)} smooth points")
    ref = np.nonzero(lab >= 0)[0]
    if len(ref) == 0:
        raise PropagationError("every smooth point is noise; nothing to propagate from")
    if len(b) == 0:
        return np.empty(0, dtype=int)
    if b.shape[1] != s.shape[1]:
        raise ParameterError(f"boundary points have {b.shape[1]} features, smooth points {s.shape[1]}")
    diff = b[:, None, :] - s[ref][None, :, :]
    nearest = np.argmin(np.einsum("bim,bim->bi", diff, diff), axis=1)
    return lab[ref[nearest]]


def hybrid_hdbscan_1nn(full_data, partition, mcs_candidates=MCS_CANDIDATES, relabel_noise: bool = True):
    """HDBSCAN on S, then 1-NN from S's clusters to every boundary point.

    With ``relabel_noise`` the smooth points HDBSCAN left as noise are
    assigned the same way, so every sample ends up with a cluster label.
    """
    x = _points(full_data)
    s_idx = np.asarray(partition.smooth_indices)
    b_idx = np.asarray(partition.boundary_indices)
    on_s, mcs = hdbscan_best_mcs(x[s_idx], mcs_candidates)
    labels = np.full(len(x), -1, dtype=int)
    labels[s_idx] = on_s.labels
    targets = b_idx
    if relabel_noise:
        targets = np.concatenate([b_idx, s_idx[on_s.labels < 0]])
    if len(targets):
        labels[targets] = propagate_labels_1nn(x[s_idx], on_s.labels, x[targets])
    return ClusteringResult(
        labels=labels,
        n_clusters=on_s.n_clusters,
        meta={"chosen_mcs": mcs, "smooth_noise": int(np.sum(on_s.labels < 0))},
    )
