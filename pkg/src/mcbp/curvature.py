"""Mean-curvature boundary scoring.

For every sample ``x_i`` with k-NN patch ``P_i``:

* ``Sigma_i``   local covariance about ``x_i`` (sum over the patch, divided by k)
* ``U_i``       eigenvectors of ``Sigma_i``
* ``X_i``       design matrix ``[1, u_1..u_m, u_a*u_a, u_a*u_b (a<b)]`` built from
                the eigenvector columns themselves, so every block is m x (.)
* ``H_i``       the quadratic block of ``X_i``; ``Hess_i = H_i H_i^T`` (m x m, PSD)
* ``S_i``       ``Hess_i Sigma_i``; the score is ``K_i = tr(S_i)``

Nothing is inverted, so singular local covariances need no regularisation.
Scores are min-max normalised and thresholded at a percentile; samples at
or above the threshold are boundary points.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DatasetTooSmallError, DimensionError, ParameterError
from .knn import NeighborGraph, build_knn_graph, default_k
from .linalg import batched_sym_eig, covariance, patch_covariances

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LocalGeometry:
    covariance: np.ndarray
    eigenvalues: np.ndarray
    eigenbasis: np.ndarray
    design: np.ndarray
    quadratic: np.ndarray
    hessian: np.ndarray
    shape_operator: np.ndarray
    degenerate: bool = False

    @property
    def mean_curvature(self) -> float:
        return float(np.trace(self.shape_operator))


@dataclass(frozen=True)
class CurvatureReport:
    raw_scores: np.ndarray
    normalized_scores: np.ndarray
    threshold: float
    boundary_flags: np.ndarray
    k: int
    p: float
    degenerate_scores: bool = False
    degenerate_patches: tuple[int, ...] = ()
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.raw_scores)

    @property
    def n_boundary(self) -> int:
        return int(self.boundary_flags.sum())

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("index,raw_K,norm_K,boundary\n")
            for i in range(self.n):
                fh.write(
                    f"{i},{self.raw_scores[i]!r},{self.normalized_scores[i]!r},{int(self.boundary_flags[i])}\n"
                )

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "p": self.p,
            "threshold": self.threshold,
            "n": self.n,
            "n_boundary": self.n_boundary,
            "degenerate_scores": self.degenerate_scores,
            "degenerate_patches": list(self.degenerate_patches),
            "raw_scores": self.raw_scores.tolist(),
            "normalized_scores": self.normalized_scores.tolist(),
            "boundary": self.boundary_flags.astype(int).tolist(),
            **self.meta,
        }

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def quadratic_pairs(m: int) -> list[tuple[int, int]]:
    """Column pairs of the quadratic block: squares first, then (a, b) with a < b lexicographically."""
    return [(a, a) for a in range(m)] + [(a, b) for a in range(m) for b in range(a + 1, m)]


def local_design_matrix(eigvecs) -> np.ndarray:
    """``[1, u_1..u_m, quadratic terms]`` from an m x m eigenvector matrix."""
    u = np.asarray(eigvecs, dtype=float)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionError(f"eigenvector matrix must be square, got shape {u.shape}")
    return _design_batch(u[None])[0]


def _design_batch(u):
    b, m, _ = u.shape
    pairs = quadratic_pairs(m)
    a_idx = [a for a, _ in pairs]
    b_idx = [c for _, c in pairs]
    quad = u[:, :, a_idx] * u[:, :, b_idx]
    return np.concatenate([np.ones((b, m, 1)), u, quad], axis=2)


def hessian_form(design) -> np.ndarray:
    """``H H^T`` where ``H`` is the trailing m(m+1)/2 columns of the design matrix."""
    x = np.asarray(design, dtype=float)
    if x.ndim != 2:
        raise DimensionError(f"design matrix must be 2-D, got shape {x.shape}")
    m = x.shape[0]
    if x.shape[1] != 1 + m + m * (m + 1) // 2:
        raise DimensionError(f"design matrix for m={m} needs {1 + m + m * (m + 1) // 2} columns, got {x.shape[1]}")
    h = x[:, 1 + m:]
    return h @ h.T


def _curvature_chunk(x, rows, neighbors):
    cov = patch_covariances(x, neighbors[rows], centers=x[rows])
    _, vecs, _ = batched_sym_eig(cov)
    m = x.shape[1]
    quad = _design_batch(vecs)[:, :, 1 + m:]
    hess = np.einsum("bic,bjc->bij", quad, quad)
    # tr(Hess @ Sigma) without forming the product
    k = np.einsum("bij,bji->b", hess, cov)
    degenerate = ~np.any(cov != 0.0, axis=(1, 2))
    k[degenerate] = 0.0
    return k, degenerate


def raw_curvature_scores(data, graph: NeighborGraph, n_jobs: int = 1, chunk_size: int = 2048):
    """Per-sample ``tr(Hess_i Sigma_i)`` for every sample.

    The loop is split into chunks; with ``n_jobs > 1`` chunks run on a thread
    pool. Each chunk writes only its own slots, so the result does not depend
    on scheduling. Returns ``(scores, degenerate_mask)``.
    """
    x = np.asarray(getattr(data, "features", data), dtype=float)
    n = len(x)
    if graph.n != n:
        raise ParameterError(f"graph has {graph.n} rows, data has {n}")
    if graph.k < 2:
        raise ParameterError("curvature needs k >= 2")
    scores = np.empty(n)
    degenerate = np.empty(n, dtype=bool)
    chunks = [np.arange(s, min(s + chunk_size, n)) for s in range(0, n, chunk_size)]

    def work(rows):
        scores[rows], degenerate[rows] = _curvature_chunk(x, rows, graph.neighbors)

    if n_jobs == -1:
        n_jobs = os.cpu_count() or 1
    if n_jobs > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            list(pool.map(work, chunks))
    else:
        for rows in chunks:
            work(rows)
    return scores, degenerate


def mean_curvature_at(point_index: int, data, graph: NeighborGraph):
    """Score of one sample together with every intermediate of its computation."""
    x = np.asarray(getattr(data, "features", data), dtype=float)
    if not 0 <= point_index < len(x):
        raise ParameterError(f"point index {point_index} out of range")
    if graph.k < 2:
        raise ParameterError("curvature needs k >= 2")
    nb = graph.neighbors[point_index]
    cov = covariance(np.vstack([x[point_index], x[nb]]).T, x[point_index])
    vals, vecs, _ = batched_sym_eig(cov[None])
    design = _design_batch(vecs)[0]
    hess = hessian_form(design)
    shape_op = hess @ cov
    degenerate = not np.any(cov != 0.0)
    geom = LocalGeometry(
        covariance=cov,
        eigenvalues=vals[0],
        eigenbasis=vecs[0],
        design=design,
        quadratic=design[:, 1 + x.shape[1]:],
        hessian=hess,
        shape_operator=shape_op,
        degenerate=degenerate,
    )
    score = 0.0 if degenerate else float(np.trace(shape_op))
    return score, geom


def normalize_scores(raw):
    """Min-max map onto [0, 1]. Returns ``(scores, degenerate)``; constant input maps to zeros."""
    r = np.asarray(raw, dtype=float).reshape(-1)
    if r.size == 0:
        raise ParameterError("cannot normalise an empty score vector")
    lo, hi = r.min(), r.max()
    if not hi > lo:
        return np.zeros_like(r), True
    return (r - lo) / (hi - lo), False


def percentile_threshold(scores, p: float) -> float:
    """Linear-interpolation percentile at rank ``p * (n - 1)`` of the sorted scores."""
    if not 0.0 < p < 1.0:
        raise ParameterError(f"percentile p={p} must lie strictly between 0 and 1")
    s = np.sort(np.asarray(scores, dtype=float).reshape(-1))
    if s.size == 0:
        raise ParameterError("cannot threshold an empty score vector")
    rank = p * (s.size - 1)
    lo = int(np.floor(rank))
    hi = min(lo + 1, s.size - 1)
    frac = rank - lo
    if frac == 0.0 or s[hi] == s[lo]:
        return float(s[lo])
    return float(min(max(s[lo] + frac * (s[hi] - s[lo]), s[lo]), s[hi]))


def mcbp(data, k: int | None = None, p: float = 0.75, graph: NeighborGraph | None = None, n_jobs: int = 1):
    """Score every sample and flag the boundary points.

    ``k`` defaults to floor(log2 n). A constant score vector flags nothing and
    sets ``degenerate_scores`` instead of flagging every sample.
    """
    x = np.asarray(getattr(data, "features", data), dtype=float)
    n = len(x)
    if k is None:
        k = default_k(n)
    if k < 2:
        raise ParameterError(f"k={k} must be at least 2")
    if not 0.0 < p < 1.0:
        raise ParameterError(f"percentile p={p} must lie strictly between 0 and 1")
    if n < k + 2:
        raise DatasetTooSmallError(f"need at least k+2={k + 2} samples, got {n}")
    if graph is None:
        graph = build_knn_graph(x, k)
    elif graph.k != k:
        raise ParameterError(f"graph was built with k={graph.k}, not {k}")

    raw, degenerate = raw_curvature_scores(x, graph, n_jobs=n_jobs)
    norm, flat = normalize_scores(raw)
    threshold = percentile_threshold(norm, p)
    if flat:
        log.warning("all curvature scores are equal; no boundary points flagged")
        flags = np.zeros(n, dtype=bool)
    else:
        flags = norm >= threshold
    return CurvatureReport(
        raw_scores=raw,
        normalized_scores=norm,
        threshold=threshold,
        boundary_flags=flags,
        k=k,
        p=p,
        degenerate_scores=flat,
        degenerate_patches=tuple(int(i) for i in np.nonzero(degenerate)[0]),
    )
