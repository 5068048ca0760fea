"""k-means++ seeding and Lloyd iterations."""

from __future__ import annotations

import numpy as np

from ..errors import ParameterError
from .result import ClusteringResult


def _points(data):
    x = np.asarray(getattr(data, "features", data), dtype=float)
    if x.ndim != 2:
        raise ParameterError(f"expected an (n, m) array, got shape {x.shape}")
    return x


def kmeans_pp_init(data, c: int, rng_seed=0, return_indices: bool = False):
    """D^2 seeding: first centre uniform, each next one with probability
    proportional to the squared distance to the closest centre chosen so far."""
    x = _points(data)
    n = len(x)
    if not 1 <= c <= n:
        raise ParameterError(f"cannot pick {c} centres from {n} points")
    rng = np.random.default_rng(rng_seed)
    chosen = [int(rng.integers(n))]
    d2 = np.sum((x - x[chosen[0]]) ** 2, axis=1)
    for _ in range(1, c):
        total = d2.sum()
        if total > 0.0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            # every remaining point duplicates a centre: fall back to uniform over unchosen rows
            rest = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rng.choice(rest))
        chosen.append(nxt)
        d2 = np.minimum(d2, np.sum((x - x[nxt]) ** 2, axis=1))
    centres = x[chosen].copy()
    return (centres, np.array(chosen)) if return_indices else centres


def _assign(x, centres):
    diff = x[:, None, :] - centres[None, :, :]
    d2 = np.einsum("ncm,ncm->nc", diff, diff)
    labels = np.argmin(d2, axis=1)
    return labels, d2[np.arange(len(x)), labels]


def _means(x, labels, c, fallback):
    counts = np.bincount(labels, minlength=c)
    sums = np.zeros((c, x.shape[1]))
    np.add.at(sums, labels, x)
    out = fallback.copy()
    nz = counts > 0
    out[nz] = sums[nz] / counts[nz, None]
    return out, counts


def kmeans(data, init_centroids, max_iter: int = 300, tol: float = 1e-6) -> ClusteringResult:
    """Lloyd's algorithm from the given centres.

    Stops when no centre moves by ``tol`` or more (Euclidean) or after
    ``max_iter`` rounds. An emptied cluster is re-seeded with the point
    farthest from its current centre. The returned centroids are the exact
    means of the returned labels.
    """
    x = _points(data)
    centres = np.array(init_centroids, dtype=float, copy=True)
    if centres.ndim != 2 or centres.shape[1] != x.shape[1]:
        raise ParameterError(f"initial centroids of shape {centres.shape} do not match data of shape {x.shape}")
    c = len(centres)
    if not 1 <= c <= len(x):
        raise ParameterError(f"cannot fit {c} clusters to {len(x)} points")

    history = []
    converged = False
    it = 0
    labels, d2 = _assign(x, centres)
    for it in range(1, max_iter + 1):
        inertia = float(d2.sum())
        if history:
            assert inertia <= history[-1] * (1 + 1e-12) + 1e-12, "k-means inertia increased"
        history.append(inertia)
        new, counts = _means(x, labels, c, centres)
        for j in np.nonzero(counts == 0)[0]:
            far = int(np.argmax(d2))
            new[j] = x[far]
            d2[far] = 0.0
        shift = np.sqrt(np.sum((new - centres) ** 2, axis=1)).max()
        centres = new
        labels, d2 = _assign(x, centres)
        if shift < tol:
            converged = True
            break

    counts = np.bincount(labels, minlength=c)
    centres, _ = _means(x, labels, c, centres)
    inertia = float(np.sum((x - centres[labels]) ** 2))
    return ClusteringResult(
        labels=labels,
        centroids=centres,
        n_clusters=c,
        iterations=it,
        inertia=inertia,
        converged=converged,
        meta={"inertia_history": history, "empty_clusters": int(np.sum(counts == 0))},
    )


def kmeans_pp(data, c: int, rng_seed=0, max_iter: int = 300, tol: float = 1e-6) -> ClusteringResult:
    """k-means++ seeding followed by Lloyd iterations."""
    return kmeans(data, kmeans_pp_init(data, c, rng_seed), max_iter=max_iter, tol=tol)
