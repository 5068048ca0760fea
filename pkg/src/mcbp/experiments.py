"""Baseline-vs-treatment clustering protocols over a seed list.

Each strategy clusters the data once without and once with the curvature
filter, scores both with SC/CH/DB and reports per-index medians over seeds.

=====================  ===========================  ===========================
strategy               baseline                     treatment
=====================  ===========================  ===========================
filtered-kmeans        k-means++ on X, scored on X  k-means++ on S, scored on S
s-centroids            k-means++ on X               S-centroid init, on X
hdbscan-filter         HDBSCAN on X, scored on X    HDBSCAN on S, scored on S
hdbscan-s-centroids    HDBSCAN on X                 HDBSCAN S-centroids -> k-means
hybrid-1nn             HDBSCAN on X                 HDBSCAN on S + 1-NN on B
=====================  ===========================  ===========================

HDBSCAN runs pick ``min_cluster_size`` from the candidate list by silhouette.
Indices skip noise, except for ``hybrid-1nn``, which scores every point and
counts HDBSCAN noise on X as one extra group.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cluster import hdbscan_best_mcs, hdbscan_s_centroids, hybrid_hdbscan_1nn, kmeans_pp, s_centroid_init
from .cluster.strategies import MCS_CANDIDATES
from .data import Dataset
from .errors import MCBPError, ParameterError
from .filter import Partition, curvature_filter
from .metrics import evaluate

STRATEGIES = ("filtered-kmeans", "s-centroids", "hdbscan-filter", "hdbscan-s-centroids", "hybrid-1nn")
INDICES = ("silhouette", "calinski_harabasz", "davies_bouldin")
# HDBSCAN strategies do not use the seed, so one run stands for all of them
_SEEDED = {"filtered-kmeans", "s-centroids"}


@dataclass(frozen=True)
class ExperimentRow:
    dataset: str
    strategy: str
    baseline: dict
    treatment: dict
    n_seeds: int
    n_smooth: int
    n_boundary: int
    failures: list = field(default_factory=list)

    TABLE_HEADER = ("dataset", "SC_X", "CH_X", "DB_X", "SC_S", "CH_S", "DB_S")

    def table_cells(self) -> list[str]:
        cells = [self.dataset]
        for side in (self.baseline, self.treatment):
            cells.extend(_fmt(side.get(key)) for key in INDICES)
        return cells

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "strategy": self.strategy,
            "baseline": self.baseline,
            "treatment": self.treatment,
            "n_seeds": self.n_seeds,
            "n_smooth": self.n_smooth,
            "n_boundary": self.n_boundary,
            "failures": self.failures,
        }


def _fmt(v) -> str:
    return "nan" if v is None or not np.isfinite(v) else f"{v:.4f}"


def _scores(data, labels, noise="exclude") -> dict:
    s = evaluate(data, labels, noise=noise)
    return {key: float(getattr(s, key)) for key in INDICES} | {"n_noise": s.n_noise, "n_clusters": s.n_clusters}


def _one_seed(strategy, x: Dataset, part: Partition, c, seed, mcs):
    s = part.smooth(x)
    if strategy == "filtered-kmeans":
        return _scores(x, kmeans_pp(x, c, seed).labels), _scores(s, kmeans_pp(s, c, seed).labels)
    if strategy == "s-centroids":
        return _scores(x, kmeans_pp(x, c, seed).labels), _scores(x, s_centroid_init(x, part, c, seed).labels)
    on_x, _ = hdbscan_best_mcs(x, mcs)
    if strategy == "hdbscan-filter":
        return _scores(x, on_x.labels), _scores(s, hdbscan_best_mcs(s, mcs)[0].labels)
    if strategy == "hdbscan-s-centroids":
        return _scores(x, on_x.labels), _scores(x, hdbscan_s_centroids(x, part, mcs, seed).labels)
    if strategy == "hybrid-1nn":
        return (_scores(x, on_x.labels, noise="group"),
                _scores(x, hybrid_hdbscan_1nn(x, part, mcs).labels, noise="group"))
    raise ParameterError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")


def _median(runs, key):
    vals = [r[key] for r in runs]
    return float(np.median(vals)) if vals else float("nan")


def run_experiment(data: Dataset, strategy: str, seeds=range(20), k=None, p=0.75, mcs=MCS_CANDIDATES,
                   n_clusters=None, partition: Partition | None = None, n_jobs: int = 1) -> ExperimentRow:
    """Run one protocol on one (already preprocessed) dataset.

    ``n_clusters`` defaults to the dataset's class count for the k-means
    strategies. Seeds that fail are recorded in ``failures`` and left out of
    the medians.
    """
    if strategy not in STRATEGIES:
        raise ParameterError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ParameterError("seed list is empty")
    c = n_clusters if n_clusters is not None else data.n_classes
    if strategy in _SEEDED and not c:
        raise ParameterError(f"strategy {strategy} needs a cluster count: label the data or pass n_clusters")
    part = partition if partition is not None else curvature_filter(data, k, p)
    run_seeds = seeds if strategy in _SEEDED else seeds[:1]

    def job(seed):
        try:
            return seed, _one_seed(strategy, data, part, c, seed, mcs), None
        except MCBPError as exc:
            return seed, None, f"seed {seed}: {type(exc).__name__}: {exc}"

    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            out = list(pool.map(job, run_seeds))
    else:
        out = [job(s) for s in run_seeds]
    ok = [r for _, r, err in out if r is not None]
    failures = [err for _, _, err in out if err is not None]
    base = {key: _median([b for b, _ in ok], key) for key in INDICES}
    treat = {key: _median([t for _, t in ok], key) for key in INDICES}
    return ExperimentRow(
        dataset=data.name or "data",
        strategy=strategy,
        baseline=base,
        treatment=treat,
        n_seeds=len(ok),
        n_smooth=len(part.smooth_indices),
        n_boundary=len(part.boundary_indices),
        failures=failures,
    )


def write_table(rows, path) -> None:
    """CSV table, one row per dataset, baseline (X) columns then treatment (S) columns."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(ExperimentRow.TABLE_HEADER) + "\n")
        for row in rows:
            fh.write(",".join(row.table_cells()) + "\n")
