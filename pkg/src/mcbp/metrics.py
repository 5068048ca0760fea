"""Internal clustering validity indices: silhouette, Calinski-Harabasz, Davies-Bouldin.

By default points labelled -1 (noise) are removed before any index is
computed. With ``noise="group"`` they are kept and scored as one extra
cluster, which is how an all-points evaluation of a noisy labelling is done.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import ParameterError, UndefinedIndexError

CH_SENTINEL = 1e12


@dataclass(frozen=True)
class IndexScores:
    silhouette: float
    calinski_harabasz: float
    davies_bouldin: float
    evaluated_points: int
    n_clusters: int
    n_noise: int = 0
    ch_capped: bool = False

    def as_dict(self) -> dict:
        return asdict(self)


NOISE_MODES = ("exclude", "group")


def _prepare(data, labels, noise="exclude"):
    x = np.asarray(getattr(data, "features", data), dtype=float)
    y = np.asarray(labels).astype(int).reshape(-1)
    if x.ndim != 2 or len(x) != len(y):
        raise ParameterError(f"{len(y)} labels for data of shape {x.shape}")
    if noise not in NOISE_MODES:
        raise ParameterError(f"noise must be one of {NOISE_MODES}, got {noise!r}")
    if noise == "group":
        y = np.where(y == -1, y.max() + 1, y)
    keep = y != -1
    x, y = x[keep], y[keep]
    clusters, codes = np.unique(y, return_inverse=True)
    if len(clusters) < 2:
        raise UndefinedIndexError(f"indices need at least 2 clusters, got {len(clusters)}")
    return x, codes, len(clusters), int((~keep).sum())


def _centroids(x, codes, c):
    counts = np.bincount(codes, minlength=c).astype(float)
    sums = np.zeros((c, x.shape[1]))
    np.add.at(sums, codes, x)
    return sums / counts[:, None], counts


def silhouette(data, labels, block: int = 1024, noise="exclude") -> float:
    """Mean silhouette over non-noise points; points in singleton clusters score 0."""
    x, codes, c, _ = _prepare(data, labels, noise)
    n = len(x)
    onehot = np.zeros((n, c))
    onehot[np.arange(n), codes] = 1.0
    counts = onehot.sum(axis=0)
    s = np.zeros(n)
    for start in range(0, n, block):
        q = x[start:start + block]
        diff = q[:, None, :] - x[None, :, :]
        d = np.sqrt(np.einsum("ijm,ijm->ij", diff, diff))
        sums = d @ onehot  # (b, c) total distance to each cluster
        own = codes[start:start + block]
        rows = np.arange(len(q))
        own_size = counts[own]
        with np.errstate(invalid="ignore", divide="ignore"):
            a = sums[rows, own] / (own_size - 1)
            mean_other = sums / counts[None, :]
        mean_other[rows, own] = np.inf
        b = mean_other.min(axis=1)
        denom = np.maximum(a, b)
        with np.errstate(invalid="ignore", divide="ignore"):
            val = np.where(denom > 0, (b - a) / denom, 0.0)
        s[start:start + block] = np.where(own_size > 1, val, 0.0)
    return float(s.mean())


def calinski_harabasz(data, labels, noise="exclude") -> float:
    """Between/within dispersion ratio; zero within-dispersion returns ``CH_SENTINEL``."""
    return _calinski_harabasz(*_prepare(data, labels, noise)[:3])[0]


def _calinski_harabasz(x, codes, c):
    n = len(x)
    cents, counts = _centroids(x, codes, c)
    overall = x.mean(axis=0)
    between = float(np.sum(counts * np.sum((cents - overall) ** 2, axis=1)))
    within = float(np.sum((x - cents[codes]) ** 2))
    if within <= 0.0 or n == c:
        return CH_SENTINEL, True
    return between * (n - c) / (within * (c - 1)), False


def davies_bouldin(data, labels, noise="exclude") -> float:
    """Mean over clusters of the worst ``(s_i + s_j) / d_ij``."""
    return _davies_bouldin(*_prepare(data, labels, noise)[:3])


def _davies_bouldin(x, codes, c):
    cents, counts = _centroids(x, codes, c)
    spread = np.zeros(c)
    np.add.at(spread, codes, np.linalg.norm(x - cents[codes], axis=1))
    spread /= counts
    diff = cents[:, None, :] - cents[None, :, :]
    sep = np.sqrt(np.einsum("ijm,ijm->ij", diff, diff))
    off = ~np.eye(c, dtype=bool)
    if np.any(sep[off] == 0.0):
        raise UndefinedIndexError("two clusters share a centroid; Davies-Bouldin is undefined")
    ratio = np.full((c, c), -np.inf)
    ratio[off] = ((spread[:, None] + spread[None, :]) / np.where(off, sep, 1.0))[off]
    return float(ratio.max(axis=1).mean())


def evaluate(data, labels, noise="exclude") -> IndexScores:
    """All three indices at once, with the noise count and CH cap flag."""
    x, codes, c, n_noise = _prepare(data, labels, noise)
    if noise == "group":
        n_noise = int(np.sum(np.asarray(labels) == -1))
    ch, capped = _calinski_harabasz(x, codes, c)
    return IndexScores(
        silhouette=silhouette(x, codes),
        calinski_harabasz=ch,
        davies_bouldin=_davies_bouldin(x, codes, c),
        evaluated_points=len(x),
        n_clusters=c,
        n_noise=n_noise,
        ch_capped=capped,
    )
