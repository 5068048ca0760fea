"""Acceptance suite: one test per criterion, each with its own runtime budget.

Every test records a PASS/FAIL line in ``RESULTS``; ``conftest.py`` prints
the lines at the end of the session.
"""

import time

import numpy as np
import pytest

from mcbp.bench import run_scaling
from mcbp.cluster import hdbscan
from mcbp.cluster.hdbscan import minimum_spanning_tree
from mcbp.cluster.strategies import hybrid_hdbscan_1nn
from mcbp.curvature import hessian_form, local_design_matrix, mcbp, mean_curvature_at, percentile_threshold
from mcbp.data import TWO_BLOB_CENTERS, gen_blobs, gen_moons, gen_noisy_blobs, load_iris, moon_skeleton_distance, standardize
from mcbp.experiments import run_experiment
from mcbp.filter import curvature_filter
from mcbp.knn import build_knn_graph
from mcbp.laplacian import laplacian_curvature_scores
from mcbp.metrics import calinski_harabasz, davies_bouldin, evaluate, silhouette
from oracles import (
    calinski_harabasz_loops,
    curvature_score,
    davies_bouldin_loops,
    knn_bruteforce,
    mst_weight_exhaustive,
    silhouette_loops,
)

RESULTS: dict[int, str] = {}


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        return False


def _record(n, title, checks, budget):
    ok = all(v for _, v in checks) and budget.elapsed < budget.seconds
    detail = "; ".join(f"{name}={'ok' if v else 'FAIL'}" for name, v in checks)
    line = f"criterion {n:>2} {'PASS' if ok else 'FAIL'}  {title}  [{detail}; {budget.elapsed:.1f}s < {budget.seconds:g}s]"
    RESULTS[n] = line
    print(line)
    assert ok, line


def _iris():
    return standardize(load_iris())


def _majority_accuracy(truth, pred):
    """Share of points whose cluster's majority class is their own; 0 if two classes share a cluster."""
    majority = {t: np.bincount(pred[truth == t] - pred.min()).argmax() for t in np.unique(truth)}
    if len(set(majority.values())) < len(majority):
        return 0.0
    return float(np.mean([pred[i] - pred.min() == majority[t] for i, t in enumerate(truth)]))


def test_criterion_01_curvature_oracle():
    with Budget(5) as b:
        worst = 0.0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            n, m = int(rng.integers(12, 51)), int(rng.integers(2, 7))
            x = rng.standard_normal((n, m)) * rng.uniform(0.5, 3.0, m)
            k = int(rng.integers(m + 1, min(n - 1, 12) + 1))
            rep = mcbp(x, k)
            nb = knn_bruteforce(x, k)
            ref = np.array([curvature_score(x, i, nb[i]) for i in range(n)])
            worst = max(worst, float(np.max(np.abs(rep.raw_scores - ref) / np.abs(ref))))
    _record(1, "curvature core matches brute-force oracle", [(f"max rel err {worst:.1e} <= 1e-9", worst <= 1e-9)], b)


def test_criterion_02_invariances():
    with Budget(30) as b:
        rng = np.random.default_rng(2)
        x = rng.standard_normal((200, 4))
        graph = build_knn_graph(x, 8)
        h_err = tr_err = 0.0
        for i in range(0, 200, 5):
            _, geom = mean_curvature_at(i, x, graph)
            u = geom.eigenbasis
            for _ in range(5):
                signs = rng.choice([-1.0, 1.0], 4)
                perm = rng.permutation(4)
                h = hessian_form(local_design_matrix((u * signs)[:, perm]))
                h_err = max(h_err, float(np.linalg.norm(h - geom.hessian)))
            s = geom.covariance
            tr_err = max(tr_err, abs(np.trace(geom.hessian @ s) - np.trace(s @ geom.hessian)))

        flags_equal = True
        for seed in range(10):
            pts = np.random.default_rng(100 + seed).standard_normal((150, 3))
            rep = mcbp(pts, 7, 0.7)
            for transform in (lambda r: r, lambda r: 5.0 * r + 2.0, np.sqrt):
                t = transform(rep.raw_scores)
                flags_equal &= np.array_equal(rep.boundary_flags, t >= percentile_threshold(t, 0.7))

        knn_exact = True
        for n, m, k in ((1000, 2, 8), (400, 5, 10), (300, 3, 6)):
            pts = np.random.default_rng(n + m).standard_normal((n, m))
            knn_exact &= np.array_equal(build_knn_graph(pts, k).neighbors, knn_bruteforce(pts, k))
        grid = np.array([[i, j] for i in range(20) for j in range(20)], dtype=float)
        knn_exact &= np.array_equal(build_knn_graph(grid, 4).neighbors, knn_bruteforce(grid, 4))
    _record(2, "invariance suite", [
        (f"H sign/permutation {h_err:.1e} <= 1e-10", h_err <= 1e-10),
        (f"cyclic trace {tr_err:.1e} <= 1e-9", tr_err <= 1e-9),
        ("monotone threshold flags equal", bool(flags_equal)),
        ("k-NN exact", bool(knn_exact)),
    ], b)


def test_criterion_03_synthetic_geometry():
    with Budget(20) as b:
        blob = gen_blobs(400, ((0.0, 0.0),), rng_seed=0)
        rep = mcbp(blob, 8, 0.8)
        r = np.linalg.norm(blob.features - blob.features.mean(axis=0), axis=1)
        ratio = r[rep.boundary_flags].mean() / r[~rep.boundary_flags].mean()

        moons = gen_moons(1000, 0.1, rng_seed=0)
        rep = mcbp(moons, 9, 0.75)
        sd = moon_skeleton_distance(moons.features, moons.labels)
        band = sd >= np.quantile(sd, 0.7)
        share = band[rep.boundary_flags].mean()
    _record(3, "synthetic geometry", [
        (f"blob radius ratio {ratio:.2f} >= 1.5", ratio >= 1.5),
        (f"moons top-30% band share {share:.2f} >= 0.60", share >= 0.60),
    ], b)


def test_criterion_04_filtered_kmeans_direction():
    with Budget(10) as b:
        row = run_experiment(_iris(), "filtered-kmeans", seeds=range(20), k=7, p=0.75)
        sc_x, sc_s = row.baseline["silhouette"], row.treatment["silhouette"]
        db_x, db_s = row.baseline["davies_bouldin"], row.treatment["davies_bouldin"]
    _record(4, "filtered k-means++ on iris", [
        (f"SC {sc_x:.4f} -> {sc_s:.4f} rises", sc_s > sc_x),
        (f"DB {db_x:.4f} -> {db_s:.4f} falls", db_s < db_x),
        (f"SC(raw) {sc_x:.4f} within 0.48 +- 0.05", abs(sc_x - 0.48) <= 0.05),
    ], b)


def test_criterion_05_s_centroid_direction():
    with Budget(10) as b:
        checks = []
        for name, data in (("iris", _iris()), ("noisy blobs", gen_noisy_blobs(400, 0.1, rng_seed=0))):
            row = run_experiment(data, "s-centroids", seeds=range(20))
            sc_x, sc_s = row.baseline["silhouette"], row.treatment["silhouette"]
            checks.append((f"{name} SC {sc_s:.4f} >= {sc_x:.4f}", sc_s >= sc_x))
    _record(5, "S-centroid initialisation", checks, b)


def test_criterion_06_hdbscan_on_s():
    with Budget(10) as b:
        row = run_experiment(_iris(), "hdbscan-filter", k=7, p=0.75, mcs=(5, 10, 20))
        sc_x, sc_s = row.baseline["silhouette"], row.treatment["silhouette"]
    _record(6, "HDBSCAN on S vs X (iris)", [(f"SC {sc_x:.4f} -> {sc_s:.4f} rises", sc_s > sc_x)], b)


def test_criterion_07_hybrid_protocol():
    with Budget(10) as b:
        data = gen_noisy_blobs(400, 0.1, rng_seed=0)
        part = curvature_filter(data, None, 0.75)
        hybrid = hybrid_hdbscan_1nn(data, part)
        row = run_experiment(data, "hybrid-1nn", partition=part)
        sc_x, sc_h = row.baseline["silhouette"], row.treatment["silhouette"]
        core = data.labels >= 0
        acc = _majority_accuracy(data.labels[core], hybrid.labels[core])
    _record(7, "hybrid HDBSCAN-on-S + 1-NN", [
        (f"SC all points {sc_h:.4f} >= {sc_x:.4f}", sc_h >= sc_x),
        (f"core label accuracy {acc:.3f} >= 0.95", acc >= 0.95),
    ], b)


def test_criterion_08_hdbscan_internals():
    with Budget(60) as b:
        mst_ok = True
        for n in range(2, 10):
            rng = np.random.default_rng(800 + n)
            for ties in ((False, True) if n < 9 else (False,)):
                w = rng.integers(1, 4, (n, n)).astype(float) if ties else rng.random((n, n))
                w = np.triu(w, 1)
                w = w + w.T
                mst_ok &= abs(minimum_spanning_tree(w)[:, 2].sum() - mst_weight_exhaustive(w)) <= 1e-12
        res = hdbscan(gen_blobs(400, TWO_BLOB_CENTERS, rng_seed=0), 5)
    _record(8, "HDBSCAN internals", [
        ("MST weight equals exhaustive minimum, n <= 9", bool(mst_ok)),
        (f"two blobs give {res.n_clusters} clusters at mcs=5", res.n_clusters == 2),
    ], b)


def test_criterion_09_metrics_oracle():
    with Budget(5) as b:
        checks = []
        for name, data in (("raw", load_iris()), ("standardized", _iris())):
            x, y = data.features, data.labels
            diffs = [
                abs(silhouette(x, y) - silhouette_loops(x, y)),
                abs(calinski_harabasz(x, y) - calinski_harabasz_loops(x, y)),
                abs(davies_bouldin(x, y) - davies_bouldin_loops(x, y)),
            ]
            checks.append((f"iris {name} max diff {max(diffs):.1e} <= 1e-6", max(diffs) <= 1e-6))
        s = evaluate(load_iris(), load_iris().labels)
        print(f"iris true labels: SC={s.silhouette:.4f} CH={s.calinski_harabasz:.2f} DB={s.davies_bouldin:.4f}")
    _record(9, "metrics oracle", checks, b)


def test_criterion_10_laplacian_proxy():
    with Budget(10) as b:
        rng = np.random.default_rng(10)

        def circle(r):
            t = rng.uniform(0, 2 * np.pi, 400)
            return r * np.column_stack([np.cos(t), np.sin(t)])

        s1 = laplacian_curvature_scores(circle(1.0), 8).mean()
        s2 = laplacian_curvature_scores(circle(2.0), 8).mean()
        ratio = s1 / s2
        # equally spaced, so only curvature (none) is left in the interior residual
        t = np.linspace(0, 4, 400)
        line = laplacian_curvature_scores(np.column_stack([t, 0.5 * t]), 8)
        frac = np.abs(line[20:-20]).max() / min(s1, s2)
    _record(10, "Laplacian proxy", [
        (f"radius ratio {ratio:.2f} in [1.5, 2.5]", 1.5 <= ratio <= 2.5),
        (f"line interior / circle {frac:.1e} < 0.05", frac < 0.05),
    ], b)


@pytest.mark.slow
def test_criterion_11_scaling():
    with Budget(300) as b:
        rep = run_scaling("n", [1000, 2000, 4000, 8000], repetitions=3, m=10)
        slope = rep.slopes["curvature"]
        print(rep.summary())
    _record(11, "curvature-stage scaling in n", [(f"slope {slope:.3f} in 1.0 +- 0.25", abs(slope - 1.0) <= 0.25)], b)
