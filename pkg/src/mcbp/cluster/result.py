from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ClusteringResult:
    """Per-point labels (-1 marks noise) plus whatever the algorithm produced alongside."""

    labels: np.ndarray
    centroids: np.ndarray | None = None
    n_clusters: int = 0
    iterations: int = 0
    inertia: float | None = None
    converged: bool = True
    meta: dict = field(default_factory=dict)

    @property
    def n_noise(self) -> int:
        return int(np.sum(self.labels == -1))

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("index,label\n")
            for i, lab in enumerate(self.labels):
                fh.write(f"{i},{int(lab)}\n")

    def to_dict(self) -> dict:
        return {
            "labels": [int(v) for v in self.labels],
            "centroids": None if self.centroids is None else self.centroids.tolist(),
            "n_clusters": self.n_clusters,
            "n_noise": self.n_noise,
            "iterations": self.iterations,
            "inertia": self.inertia,
            "converged": self.converged,
            "meta": _jsonable(self.meta),
        }

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def relabel_contiguous(labels) -> np.ndarray:
    """Map non-noise labels onto 0..c-1 in order of first appearance; -1 stays -1."""
    labels = np.asarray(labels, dtype=int)
    out = np.full_like(labels, -1)
    mapping: dict[int, int] = {}
    for i, lab in enumerate(labels):
        if lab < 0:
            continue
        if lab not in mapping:
            mapping[lab] = len(mapping)
        out[i] = mapping[lab]
    return out
