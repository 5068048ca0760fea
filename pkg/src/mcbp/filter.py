"""Split a dataset into its smooth (S) and boundary (B) parts by curvature."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curvature import CurvatureReport, mcbp
from .data import Dataset
from .errors import ParameterError


@dataclass(frozen=True)
class Partition:
    smooth_indices: np.ndarray
    boundary_indices: np.ndarray
    report: CurvatureReport

    @property
    def n(self) -> int:
        return len(self.smooth_indices) + len(self.boundary_indices)

    def smooth(self, data: Dataset) -> Dataset:
        return data.subset(self.smooth_indices)

    def boundary(self, data: Dataset) -> Dataset:
        return data.subset(self.boundary_indices)

    def to_csv(self, path) -> None:
        subset = np.full(self.n, "S", dtype=object)
        subset[self.boundary_indices] = "B"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("index,subset\n")
            for i, tag in enumerate(subset):
                fh.write(f"{i},{tag}\n")


def partition(data: Dataset, report: CurvatureReport) -> Partition:
    """Indices of S (flag off) and B (flag on), each in original row order."""
    n = data.n if isinstance(data, Dataset) else len(data)
    flags = np.asarray(report.boundary_flags, dtype=bool)
    if flags.shape != (n,):
        raise ParameterError(f"report covers {flags.shape[0]} samples, dataset has {n}")
    return Partition(
        smooth_indices=np.nonzero(~flags)[0],
        boundary_indices=np.nonzero(flags)[0],
        report=report,
    )


def curvature_filter(data: Dataset, k: int | None = None, p: float = 0.75, n_jobs: int = 1) -> Partition:
    """Score ``data`` and partition it in one step."""
    return partition(data, mcbp(data, k, p, n_jobs=n_jobs))
