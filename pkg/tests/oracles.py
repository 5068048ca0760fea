"""Independent reference implementations used by the tests.

Nothing here imports from ``mcbp``: each oracle is a plain, loop-heavy
transcription of the textbook definition, written to be obviously right
rather than fast.
"""

from __future__ import annotations

import math

import numpy as np


def knn_bruteforce(x, k):
    """Neighbour lists by full pairwise sort, ties to the lower index."""
    n = len(x)
    out = []
    for i in range(n):
        cand = []
        for j in range(n):
            if j != i:
                cand.append((math.dist(x[i], x[j]), j))
        cand.sort()
        out.append([j for _, j in cand[:k]])
    return np.array(out)


def curvature_score(x, i, neighbors):
    """tr(H H^T Sigma) for sample i, one step at a time.

    Eigenvectors come from LAPACK (``np.linalg.eigh``) rather than the Jacobi
    solver under test.
    """
    xi = x[i]
    k = len(neighbors)
    m = x.shape[1]
    sigma = np.zeros((m, m))
    for j in neighbors:
        d = x[j] - xi
        for r in range(m):
            for c in range(m):
                sigma[r, c] += d[r] * d[c]
    sigma /= k
    _, u = np.linalg.eigh(sigma)
    cols = []
    for a in range(m):
        cols.append(u[:, a] * u[:, a])
    for a in range(m):
        for b in range(a + 1, m):
            cols.append(u[:, a] * u[:, b])
    h = np.column_stack(cols)
    hess = np.zeros((m, m))
    for r in range(m):
        for c in range(m):
            hess[r, c] = sum(h[r, t] * h[c, t] for t in range(h.shape[1]))
    return sum(hess[r, c] * sigma[c, r] for r in range(m) for c in range(m))


def percentile_sorted(values, p):
    s = sorted(values)
    rank = p * (len(s) - 1)
    lo = math.floor(rank)
    hi = min(lo + 1, len(s) - 1)
    return s[lo] + (rank - lo) * (s[hi] - s[lo])


def silhouette_loops(x, labels):
    labels = list(labels)
    keep = [i for i, lab in enumerate(labels) if lab != -1]
    ids = sorted({labels[i] for i in keep})
    total = 0.0
    for i in keep:
        own = [j for j in keep if labels[j] == labels[i] and j != i]
        if not own:
            continue  # singleton scores 0
        a = sum(math.dist(x[i], x[j]) for j in own) / len(own)
        b = min(
            sum(math.dist(x[i], x[j]) for j in keep if labels[j] == c) / sum(1 for j in keep if labels[j] == c)
            for c in ids
            if c != labels[i]
        )
        total += (b - a) / max(a, b) if max(a, b) > 0 else 0.0
    return total / len(keep)


def _groups(x, labels):
    keep = [i for i, lab in enumerate(labels) if lab != -1]
    ids = sorted({labels[i] for i in keep})
    groups = {c: np.array([x[i] for i in keep if labels[i] == c]) for c in ids}
    return keep, groups


def calinski_harabasz_loops(x, labels):
    keep, groups = _groups(x, labels)
    n, c = len(keep), len(groups)
    overall = np.mean([x[i] for i in keep], axis=0)
    between = sum(len(g) * float(np.sum((g.mean(axis=0) - overall) ** 2)) for g in groups.values())
    within = sum(float(np.sum((g - g.mean(axis=0)) ** 2)) for g in groups.values())
    return (between / (c - 1)) / (within / (n - c))


def davies_bouldin_loops(x, labels):
    _, groups = _groups(x, labels)
    cents = {c: g.mean(axis=0) for c, g in groups.items()}
    spread = {c: float(np.mean([math.dist(p, cents[c]) for p in g])) for c, g in groups.items()}
    worst = []
    for a in groups:
        worst.append(max((spread[a] + spread[b]) / math.dist(cents[a], cents[b]) for b in groups if b != a))
    return sum(worst) / len(worst)


def mst_weight_exhaustive(w, chunk=200_000):
    """Minimum spanning-tree weight over every labelled tree.

    Enumerates all n^(n-2) Pruefer sequences and decodes them in vectorised
    batches: at each step the smallest current leaf is joined to the next
    sequence entry.
    """
    w = np.asarray(w, dtype=float)
    n = len(w)
    if n == 1:
        return 0.0
    if n == 2:
        return float(w[0, 1])
    total = n ** (n - 2)
    best = math.inf
    rows = np.arange(chunk)
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total))
        seq = np.stack([(codes // n ** p) % n for p in range(n - 2)], axis=1)
        r = rows[: len(codes)]
        degree = np.ones((len(codes), n), dtype=int)
        np.add.at(degree, (np.repeat(r, n - 2), seq.ravel()), 1)
        weight = np.zeros(len(codes))
        for t in range(n - 2):
            leaf = np.argmax(degree == 1, axis=1)
            v = seq[:, t]
            weight += w[leaf, v]
            degree[r, leaf] -= 1
            degree[r, v] -= 1
        ends = degree == 1
        u = np.argmax(ends, axis=1)
        v = n - 1 - np.argmax(ends[:, ::-1], axis=1)
        weight += w[u, v]
        best = min(best, float(weight.min()))
    return best
