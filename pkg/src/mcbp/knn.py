"""Exact Euclidean k-nearest-neighbour search.

Low-dimensional data goes through a median-split KD-tree with exact
backtracking; above ``TREE_MAX_DIM`` features the tree prunes almost nothing
and a blocked brute-force scan is used instead. Both paths break distance
ties by the lower point index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DatasetTooSmallError, DimensionError, ParameterError

TREE_MAX_DIM = 15
LEAF_SIZE = 16


@dataclass(frozen=True)
class NeighborGraph:
    k: int
    neighbors: np.ndarray  # (n, k) int, ascending distance
    distances: np.ndarray  # (n, k) float

    @property
    def n(self) -> int:
        return self.neighbors.shape[0]


def _points(data) -> np.ndarray:
    x = getattr(data, "features", data)
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise DimensionError(f"expected an (n, m) array, got shape {x.shape}")
    return x


def default_k(n: int) -> int:
    """Neighbourhood size floor(log2 n), never below 2."""
    if n < 4:
        raise DatasetTooSmallError(f"need at least 4 samples to pick k, got {n}")
    return max(2, int(math.floor(math.log2(n))))


class KDTree:
    """Static median-split tree over the rows of ``points``.

    Queries are answered a batch at a time: an upper bound on each query's
    k-th neighbour distance is taken from a few nearby leaves, then every
    leaf whose bounding box lies within that bound is scanned exactly.
    """

    def __init__(self, points, leaf_size=LEAF_SIZE):
        self.points = _points(points)
        self.leaf_size = max(1, int(leaf_size))
        self.order = np.arange(len(self.points))
        self._leaves: list[tuple[int, int]] = []
        self._split(0, len(self.points))
        self.leaf_lo = np.array([self.points[self.order[a:b]].min(axis=0) for a, b in self._leaves])
        self.leaf_hi = np.array([self.points[self.order[a:b]].max(axis=0) for a, b in self._leaves])
        self.leaf_size_arr = np.array([b - a for a, b in self._leaves])

    def _split(self, start, end):
        if end - start > self.leaf_size:
            pts = self.points[self.order[start:end]]
            spread = pts.max(axis=0) - pts.min(axis=0)
            axis = int(np.argmax(spread))
            if spread[axis] > 0.0:
                mid = (start + end) // 2
                seg = self.order[start:end]
                part = np.argpartition(pts[:, axis], mid - start)
                self.order[start:end] = seg[part]
                self._split(start, mid)
                self._split(mid, end)
                return
        self._leaves.append((start, end))

    @property
    def n_leaves(self) -> int:
        return len(self._leaves)

    def leaf_members(self, leaf) -> np.ndarray:
        a, b = self._leaves[leaf]
        return self.order[a:b]

    def _box_dist(self, q, leaves):
        lo, hi = self.leaf_lo[leaves], self.leaf_hi[leaves]
        gap = np.maximum(lo[None] - q[:, None], 0.0) + np.maximum(q[:, None] - hi[None], 0.0)
        return np.sqrt(np.einsum("qlm,qlm->ql", gap, gap))

    def _members(self, leaves) -> np.ndarray:
        return np.concatenate([self.leaf_members(i) for i in leaves])

    def query(self, q, k, exclude=None):
        """``k`` nearest rows for each query row, ties to the lower index.

        ``exclude`` optionally gives, per query, one row index to skip (the
        query point itself). Returns ``(indices, distances)`` of shape ``(len(q), k)``.
        """
        q = np.atleast_2d(np.asarray(q, dtype=float))
        need = k + (0 if exclude is None else 1)
        if need > len(self.points):
            raise ParameterError(f"k={k} too large for {len(self.points)} points")
        # distance from the batch's bounding box to every leaf box: a lower bound for each query
        qlo, qhi = q.min(axis=0), q.max(axis=0)
        gap = np.maximum(self.leaf_lo - qhi, 0.0) + np.maximum(qlo - self.leaf_hi, 0.0)
        coarse = np.sqrt(np.einsum("lm,lm->l", gap, gap))

        # bound from the leaves nearest to the batch box
        ranked = np.argsort(coarse, kind="stable")
        count = int(np.searchsorted(np.cumsum(self.leaf_size_arr[ranked]), need)) + 1
        seed = self._members(ranked[:count])
        seed_d = _pair_dist(q, self.points[seed])
        bound = np.partition(seed_d, need - 1, axis=1)[:, need - 1]

        near = np.nonzero(coarse <= bound.max())[0]
        hit = near[(self._box_dist(q, near) <= bound[:, None]).any(axis=0)]
        cand = np.sort(self._members(hit))
        d = _pair_dist(q, self.points[cand])
        if exclude is not None:
            d[cand[None, :] == np.asarray(exclude)[:, None]] = np.inf
        return _k_smallest(d, cand, k)


def _k_smallest(d, idx, k):
    """Per row, the ``k`` smallest entries of ``d`` ordered by (distance, index).

    ``idx`` maps columns of ``d`` to point indices and must be ascending.
    """
    pick = np.argpartition(d, k - 1, axis=1)[:, :k]
    kth = np.take_along_axis(d, pick, axis=1).max(axis=1)
    tied = np.nonzero((d <= kth[:, None]).sum(axis=1) > k)[0]
    for r in tied:
        # more candidates share the k-th distance than fit: keep the lowest indices
        pool = np.nonzero(d[r] <= kth[r])[0]
        pick[r] = pool[np.argsort(d[r, pool], kind="stable")][:k]
    pd = np.take_along_axis(d, pick, axis=1)
    order = np.lexsort((idx[pick], pd), axis=1)
    pick = np.take_along_axis(pick, order, axis=1)
    return idx[pick], np.take_along_axis(d, pick, axis=1)


def _pair_dist(q, x):
    diff = q[:, None, :] - x[None, :, :]
    return np.sqrt(np.einsum("qnm,qnm->qn", diff, diff))


def _brute_force(x, k, block=512):
    n = len(x)
    nbrs = np.empty((n, k), dtype=int)
    dists = np.empty((n, k))
    ar = np.arange(n)
    for s in range(0, n, block):
        d = _pair_dist(x[s:s + block], x)
        d[np.arange(len(d)), ar[s:s + block]] = np.inf
        nbrs[s:s + block], dists[s:s + block] = _k_smallest(d, ar, k)
    return nbrs, dists


def build_knn_graph(data, k: int, method: str = "auto") -> NeighborGraph:
    """Directed k-NN graph: each row lists its ``k`` nearest other points."""
    x = _points(data)
    n, m = x.shape
    if not 1 <= k <= n - 1:
        raise ParameterError(f"k={k} outside [1, {n - 1}]")
    if method == "auto":
        method = "tree" if m <= TREE_MAX_DIM else "brute"
    if method == "brute":
        nbrs, dists = _brute_force(x, k)
    elif method == "tree":
        tree = KDTree(x, leaf_size=max(LEAF_SIZE, k + 1))
        nbrs = np.empty((n, k), dtype=int)
        dists = np.empty((n, k))
        for leaf in range(tree.n_leaves):
            rows = tree.leaf_members(leaf)
            nbrs[rows], dists[rows] = tree.query(x[rows], k, exclude=rows)
    else:
        raise ParameterError(f"unknown k-NN method {method!r}")
    return NeighborGraph(k=k, neighbors=nbrs, distances=dists)


def nearest_in_set(query, reference) -> int:
    """Index of the reference row closest to ``query``; ties go to the lower index."""
    ref = _points(reference)
    q = np.asarray(query, dtype=float).reshape(-1)
    if len(ref) == 0:
        raise ParameterError("reference set is empty")
    if q.shape[0] != ref.shape[1]:
        raise DimensionError(f"query has {q.shape[0]} features, reference has {ref.shape[1]}")
    diff = ref - q
    return int(np.argmin(np.einsum("ij,ij->i", diff, diff)))
