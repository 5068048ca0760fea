"""Wall-clock scaling of the MCBP stages in n or m.

Each grid point times the k-NN build and the curvature pass on Gaussian data,
one discarded warmup run first, then the median of ``repetitions`` runs.
Slopes are least-squares fits of log(time) on log(n) or log(m).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .curvature import normalize_scores, percentile_threshold, raw_curvature_scores
from .errors import ParameterError
from .knn import build_knn_graph, default_k

STAGES = ("knn", "curvature", "total")


@dataclass(frozen=True)
class ScalingReport:
    axis: str
    rows: list  # dicts with n, m, k and one median time per stage
    slopes: dict = field(default_factory=dict)  # empty when the grid has a single point
    repetitions: int = 5

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("n,m,k," + ",".join(f"{s}_seconds" for s in STAGES) + "\n")
            for r in self.rows:
                fh.write(f"{r['n']},{r['m']},{r['k']}," + ",".join(f"{r[s]:.6f}" for s in STAGES) + "\n")

    def summary(self) -> str:
        lines = [f"scaling in {self.axis}, median of {self.repetitions} runs"]
        for r in self.rows:
            lines.append(f"  n={r['n']:>6} m={r['m']:>3} k={r['k']:>2}  "
                         + "  ".join(f"{s}={r[s]:.4f}s" for s in STAGES))
        if self.slopes:
            lines.append("  log-log slope: " + ", ".join(f"{s}={v:.3f}" for s, v in self.slopes.items()))
        else:
            lines.append("  log-log slope: not fitted (single grid point)")
        return "\n".join(lines)


def loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float)), 1)[0])


def time_stages(x: np.ndarray, k: int, p: float = 0.75, n_jobs: int = 1) -> dict:
    t0 = time.perf_counter()
    graph = build_knn_graph(x, k)
    t1 = time.perf_counter()
    raw = raw_curvature_scores(x, graph, n_jobs=n_jobs)
    t2 = time.perf_counter()
    scores, _ = normalize_scores(raw)
    percentile_threshold(scores, p)
    t3 = time.perf_counter()
    return {"knn": t1 - t0, "curvature": t2 - t1, "total": t3 - t0}


def run_scaling(axis: str, grid, repetitions: int = 5, n: int = 2000, m: int = 10, k: int | None = None,
                rng_seed: int = 0, n_jobs: int = 1) -> ScalingReport:
    """Sweep ``axis`` ('n' or 'm') over ``grid`` with the other dimension fixed.

    ``k`` defaults to floor(log2 n) at each grid point.
    """
    if axis not in ("n", "m"):
        raise ParameterError(f"axis must be 'n' or 'm', got {axis!r}")
    grid = [int(g) for g in grid]
    if not grid or grid != sorted(grid):
        raise ParameterError("grid must be non-empty and sorted ascending")
    if repetitions < 1:
        raise ParameterError("repetitions must be at least 1")
    rng = np.random.default_rng(rng_seed)
    rows = []
    for g in grid:
        nn, mm = (g, m) if axis == "n" else (n, g)
        kk = default_k(nn) if k is None else k
        x = rng.standard_normal((nn, mm))
        time_stages(x, kk, n_jobs=n_jobs)  # warmup
        runs = [time_stages(x, kk, n_jobs=n_jobs) for _ in range(repetitions)]
        rows.append({"n": nn, "m": mm, "k": kk} | {s: float(np.median([r[s] for r in runs])) for s in STAGES})
    slopes = {}
    if len(grid) > 1:
        slopes = {s: loglog_slope(grid, [r[s] for r in rows]) for s in STAGES}
    return ScalingReport(axis=axis, rows=rows, slopes=slopes, repetitions=repetitions)
