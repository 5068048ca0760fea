"""HDBSCAN* with excess-of-mass cluster selection.

Pipeline: core distances -> mutual reachability -> minimum spanning tree
(Prim, dense) -> single-linkage merge tree -> condensed tree at
``min_cluster_size`` -> stability-maximising flat clustering. ``min_samples``
defaults to ``min_cluster_size`` and counts the point itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError
from .result import ClusteringResult

MIN_DISTANCE = 1e-12


@dataclass(frozen=True)
class CondensedTree:
    """Edges ``parent -> child`` with the lambda (1/distance) at which the child leaves.

    Cluster ids start at 0 (the root); a child is a point when ``is_cluster`` is false.
    """

    parent: np.ndarray
    child: np.ndarray
    lam: np.ndarray
    child_size: np.ndarray
    is_cluster: np.ndarray
    birth: dict
    stability: dict

    @property
    def n_clusters_total(self) -> int:
        return len(self.birth)


def pairwise_distances(x) -> np.ndarray:
    diff = x[:, None, :] - x[None, :, :]
    return np.sqrt(np.einsum("ijm,ijm->ij", diff, diff))


def core_distances(dist: np.ndarray, min_samples: int) -> np.ndarray:
    """Distance to the ``min_samples``-th nearest point, the point itself included."""
    return np.partition(dist, min_samples - 1, axis=1)[:, min_samples - 1]


def mutual_reachability(dist: np.ndarray, core: np.ndarray) -> np.ndarray:
    mr = np.maximum(dist, np.maximum(core[:, None], core[None, :]))
    np.fill_diagonal(mr, 0.0)
    return mr


def minimum_spanning_tree(weights: np.ndarray) -> np.ndarray:
    """Prim's algorithm on a dense symmetric weight matrix.

    Returns ``(n-1, 3)`` rows ``(u, v, w)`` in the order edges were added;
    ties pick the lowest vertex index.
    """
    n = len(weights)
    in_tree = np.zeros(n, dtype=bool)
    best = np.full(n, np.inf)
    src = np.zeros(n, dtype=int)
    edges = np.empty((max(n - 1, 0), 3))
    cur = 0
    in_tree[0] = True
    for e in range(n - 1):
        row = weights[cur]
        better = (~in_tree) & (row < best)
        best[better] = row[better]
        src[better] = cur
        cand = np.where(in_tree, np.inf, best)
        nxt = int(np.argmin(cand))
        edges[e] = (src[nxt], nxt, best[nxt])
        in_tree[nxt] = True
        cur = nxt
    return edges


def single_linkage(mst: np.ndarray, n: int) -> np.ndarray:
    """Merge tree from MST edges: row ``t`` merges nodes into new node ``n + t``.

    Columns are ``(left, right, distance, size)``, scipy-style.
    """
    order = np.argsort(mst[:, 2], kind="stable")
    parent = np.arange(2 * n - 1)
    size = np.concatenate([np.ones(n, dtype=int), np.zeros(n - 1, dtype=int)])

    def find(a):
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    out = np.empty((n - 1, 4))
    for t, e in enumerate(order):
        u, v, w = int(mst[e, 0]), int(mst[e, 1]), mst[e, 2]
        ru, rv = find(u), find(v)
        node = n + t
        parent[ru] = parent[rv] = node
        size[node] = size[ru] + size[rv]
        out[t] = (min(ru, rv), max(ru, rv), w, size[node])
    return out


def condense_tree(linkage: np.ndarray, min_cluster_size: int) -> CondensedTree:
    n = len(linkage) + 1
    left = linkage[:, 0].astype(int)
    right = linkage[:, 1].astype(int)
    dist = linkage[:, 2]
    sizes = np.concatenate([np.ones(n, dtype=int), linkage[:, 3].astype(int)])

    def leaves(node):
        stack, out = [node], []
        while stack:
            v = stack.pop()
            if v < n:
                out.append(v)
            else:
                stack.extend((left[v - n], right[v - n]))
        return out

    rows: list[tuple[int, int, float, int, bool]] = []
    birth = {0: 0.0}
    next_id = 1
    root = 2 * n - 2
    stack = [(root, 0)]
    while stack:
        node, cid = stack.pop()
        t = node - n  # only merges of >= min_cluster_size >= 2 points are pushed
        lam = 1.0 / max(dist[t], MIN_DISTANCE)
        a, b = left[t], right[t]
        big_a, big_b = sizes[a] >= min_cluster_size, sizes[b] >= min_cluster_size
        if big_a and big_b:
            for child in (a, b):
                birth[next_id] = lam
                rows.append((cid, next_id, lam, int(sizes[child]), True))
                stack.append((child, next_id))
                next_id += 1
        elif not big_a and not big_b:
            for child in (a, b):
                rows.extend((cid, p, lam, 1, False) for p in leaves(child))
        else:
            small, big = (b, a) if big_a else (a, b)
            rows.extend((cid, p, lam, 1, False) for p in leaves(small))
            stack.append((big, cid))

    parent = np.array([r[0] for r in rows], dtype=int)
    child = np.array([r[1] for r in rows], dtype=int)
    lam = np.array([r[2] for r in rows])
    csize = np.array([r[3] for r in rows], dtype=int)
    is_cluster = np.array([r[4] for r in rows], dtype=bool)

    stability = {c: 0.0 for c in birth}
    for p, l_, s in zip(parent, lam, csize):
        stability[int(p)] += (l_ - birth[int(p)]) * s
    return CondensedTree(parent, child, lam, csize, is_cluster, birth, stability)


def select_clusters_eom(tree: CondensedTree, allow_single_cluster: bool = False) -> list[int]:
    """Excess-of-mass selection; a parent wins ties against its children."""
    children: dict[int, list[int]] = {c: [] for c in tree.birth}
    for p, c, isc in zip(tree.parent, tree.child, tree.is_cluster):
        if isc:
            children[int(p)].append(int(c))
    best = dict(tree.stability)
    selected = {c: False for c in tree.birth}
    # children always carry larger ids than their parent, so descending id is bottom-up
    for c in sorted(tree.birth, reverse=True):
        if c == 0 and not allow_single_cluster:
            continue
        kids = children[c]
        sub = sum(best[k] for k in kids)
        if kids and sub > tree.stability[c]:
            best[c] = sub
        else:
            selected[c] = True
            stack = list(kids)
            while stack:
                d = stack.pop()
                selected[d] = False
                stack.extend(children[d])
    return sorted(c for c, s in selected.items() if s)


def label_points(tree: CondensedTree, selected: list[int], n: int) -> np.ndarray:
    parent_of = {int(c): int(p) for p, c, isc in zip(tree.parent, tree.child, tree.is_cluster) if isc}
    chosen = {c: i for i, c in enumerate(sorted(selected))}
    labels = np.full(n, -1, dtype=int)
    for p, c, isc in zip(tree.parent, tree.child, tree.is_cluster):
        if isc:
            continue
        node = int(p)
        while node not in chosen and node in parent_of:
            node = parent_of[node]
        if node in chosen:
            labels[int(c)] = chosen[node]
    return labels


def hdbscan_fit(data, min_cluster_size: int, min_samples: int | None = None, allow_single_cluster: bool = False):
    """Run the full pipeline; returns ``(ClusteringResult, CondensedTree)``."""
    x = np.asarray(getattr(data, "features", data), dtype=float)
    n = len(x)
    if min_cluster_size < 2:
        raise ParameterError(f"min_cluster_size={min_cluster_size} must be at least 2")
    if n < 2 * min_cluster_size:
        raise ParameterError(f"HDBSCAN with min_cluster_size={min_cluster_size} needs n >= {2 * min_cluster_size}, got {n}")
    ms = min_cluster_size if min_samples is None else min_samples
    if not 1 <= ms <= n:
        raise ParameterError(f"min_samples={ms} outside [1, {n}]")

    dist = pairwise_distances(x)
    core = core_distances(dist, ms)
    mr = mutual_reachability(dist, core)
    mst = minimum_spanning_tree(mr)
    tree = condense_tree(single_linkage(mst, n), min_cluster_size)
    selected = select_clusters_eom(tree, allow_single_cluster)
    labels = label_points(tree, selected, n)
    return ClusteringResult(
        labels=labels,
        n_clusters=len(selected),
        meta={
            "min_cluster_size": min_cluster_size,
            "min_samples": ms,
            "mst_weight": float(mst[:, 2].sum()),
            "selected_clusters": selected,
        },
    ), tree


def hdbscan(data, min_cluster_size: int, min_samples: int | None = None, allow_single_cluster: bool = False):
    """Flat HDBSCAN* clustering; labels are -1 for noise."""
    return hdbscan_fit(data, min_cluster_size, min_samples, allow_single_cluster)[0]
