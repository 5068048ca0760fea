"""Datasets: CSV ingestion, preprocessing and the synthetic 2-D generators."""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DataParseError, ParameterError
from .linalg import pca_project

# Synthetic fixture constants. Figures built from these are comparable to the
# published ones in shape only.
BLOB_STD = 1.0
TWO_BLOB_CENTERS = ((-4.0, 0.0), (4.0, 0.0))
ANISO_CENTERS = ((-3.0, 0.0), (3.0, 0.0))
ANISO_TRANSFORMS = (
    ((0.6, -0.6), (-0.4, 0.8)),
    ((1.2, 0.4), (0.0, 0.35)),
)
ANISO_STD = 1.0
MOON_RADIUS = 1.0
MOON_OFFSET = (1.0, 0.5)


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray | None = None
    feature_names: list[str] | None = None
    provenance: str = "raw"
    name: str = ""
    class_names: list[str] | None = None
    constant_features: tuple[int, ...] = ()

    def __post_init__(self):
        x = np.asarray(self.features, dtype=float)
        if x.ndim != 2:
            raise ParameterError(f"features must be 2-D, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ParameterError("features contain NaN or Inf")
        object.__setattr__(self, "features", x)
        if self.labels is not None:
            y = np.asarray(self.labels, dtype=int)
            if y.shape != (x.shape[0],):
                raise ParameterError(f"labels have shape {y.shape}, expected ({x.shape[0]},)")
            object.__setattr__(self, "labels", y)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def m(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int | None:
        if self.labels is None:
            return None
        return len(np.unique(self.labels[self.labels >= 0]))

    def replace(self, **changes) -> Dataset:
        return dataclasses.replace(self, **changes)

    def subset(self, indices) -> Dataset:
        idx = np.asarray(indices, dtype=int)
        return self.replace(
            features=self.features[idx],
            labels=None if self.labels is None else self.labels[idx],
        )


_MISSING = {"", "?", "na", "nan", "null"}


def load_csv(path, has_header=True, label_column=None, drop_missing=False, name=None) -> Dataset:
    """Read a numeric CSV file.

    ``label_column`` may be a header name or a zero-based column index; its
    values are factorised to ``0..C-1`` in order of first appearance. Cells
    that are empty or one of ``?``/``NA``/``NaN`` count as missing: the row
    is dropped when ``drop_missing`` is set, otherwise a
    :class:`DataParseError` names the offending row and column.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise DataParseError(f"{path}: file is empty")

    header = None
    if has_header:
        header, rows = [h.strip() for h in rows[0]], rows[1:]
    width = len(header) if header else len(rows[0])

    label_idx = None
    if label_column is not None:
        if isinstance(label_column, int) or (isinstance(label_column, str) and label_column.lstrip("-").isdigit()):
            label_idx = int(label_column) % width
        elif header is not None and label_column in header:
            label_idx = header.index(label_column)
        else:
            raise ParameterError(f"label column {label_column!r} not found in {path}")
    feat_cols = [j for j in range(width) if j != label_idx]

    feats, raw_labels = [], []
    for r, row in enumerate(rows):
        line = r + (2 if has_header else 1)
        if len(row) != width:
            raise DataParseError(f"{path}:{line}: expected {width} fields, got {len(row)}", row=line)
        values, missing = [], False
        for j in feat_cols:
            cell = row[j].strip()
            if cell.lower() in _MISSING:
                missing = True
                if not drop_missing:
                    raise DataParseError(f"{path}:{line}: missing value in column {j}", row=line, column=j)
                break
            try:
                v = float(cell)
            except ValueError:
                raise DataParseError(
                    f"{path}:{line}: non-numeric value {cell!r} in column {j}", row=line, column=j
                ) from None
            if not math.isfinite(v):
                raise DataParseError(f"{path}:{line}: non-finite value in column {j}", row=line, column=j)
            values.append(v)
        if missing:
            continue
        if label_idx is not None:
            lab = row[label_idx].strip()
            if lab.lower() in _MISSING:
                if drop_missing:
                    continue
                raise DataParseError(f"{path}:{line}: missing label", row=line, column=label_idx)
            raw_labels.append(lab)
        feats.append(values)

    if not feats:
        raise DataParseError(f"{path}: no usable rows")

    labels = class_names = None
    if label_idx is not None:
        class_names = list(dict.fromkeys(raw_labels))
        lookup = {c: i for i, c in enumerate(class_names)}
        labels = np.array([lookup[c] for c in raw_labels], dtype=int)

    names = [header[j] for j in feat_cols] if header else None
    return Dataset(
        features=np.array(feats, dtype=float),
        labels=labels,
        feature_names=names,
        name=name or path.stem,
        class_names=class_names,
    )


def write_csv(data: Dataset, path, include_labels=True) -> None:
    """Write ``data`` in the same dialect :func:`load_csv` reads."""
    names = data.feature_names or [f"x{j}" for j in range(data.m)]
    with_labels = include_labels and data.labels is not None
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(names) + (["label"] if with_labels else []))
        for i in range(data.n):
            row = [repr(float(v)) for v in data.features[i]]
            if with_labels:
                row.append(str(int(data.labels[i])))
            w.writerow(row)


def load_iris() -> Dataset:
    """The bundled 150-sample iris table with its three species as labels."""
    src = resources.files("mcbp.datasets").joinpath("iris.csv")
    with resources.as_file(src) as p:
        return load_csv(p, has_header=True, label_column="class", name="iris")


def standardize(data: Dataset) -> Dataset:
    """Zero mean, unit population standard deviation per feature.

    Constant features become all zeros and are listed in ``constant_features``.
    """
    x = data.features
    if x.shape[0] < 2:
        raise ParameterError("standardize needs at least two samples")
    mu = x.mean(axis=0)
    sd = x.std(axis=0)
    const = sd <= 1e-12 * np.maximum(1.0, np.abs(mu))
    z = (x - mu) / np.where(const, 1.0, sd)
    z[:, const] = 0.0
    return data.replace(
        features=z,
        provenance="standardized",
        constant_features=tuple(int(j) for j in np.nonzero(const)[0]),
    )


def preprocess(data: Dataset, pca_threshold: int = 50, pca_dim: int = 50) -> Dataset:
    """Standardise, then reduce with PCA when there are more than ``pca_threshold`` features."""
    z = standardize(data)
    if z.m > pca_threshold:
        return pca_project(z, min(pca_dim, z.n - 1, z.m))
    return z


def _split_counts(n, parts):
    base, rem = divmod(n, parts)
    return [base + (rem if i == 0 else 0) for i in range(parts)]


def gen_blobs(n, centers=((0.0, 0.0),), stds=BLOB_STD, rng_seed=0) -> Dataset:
    """Isotropic Gaussian blobs; any remainder of ``n`` goes to the first centre."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    k = len(centers)
    stds = np.broadcast_to(np.asarray(stds, dtype=float), (k,))
    rng = np.random.default_rng(rng_seed)
    xs, ys = [], []
    for j, cnt in enumerate(_split_counts(n, k)):
        xs.append(centers[j] + stds[j] * rng.standard_normal((cnt, centers.shape[1])))
        ys.append(np.full(cnt, j))
    return Dataset(np.vstack(xs), np.concatenate(ys), ["x", "y"][: centers.shape[1]] or None, name="blobs")


def gen_aniso(n, rng_seed=0) -> Dataset:
    """Two elongated Gaussian clusters: standard normals pushed through fixed linear maps."""
    rng = np.random.default_rng(rng_seed)
    xs, ys = [], []
    for j, cnt in enumerate(_split_counts(n, 2)):
        base = ANISO_STD * rng.standard_normal((cnt, 2))
        xs.append(base @ np.asarray(ANISO_TRANSFORMS[j]) + np.asarray(ANISO_CENTERS[j]))
        ys.append(np.full(cnt, j))
    return Dataset(np.vstack(xs), np.concatenate(ys), ["x", "y"], name="aniso")


def moon_skeleton_distance(points, labels) -> np.ndarray:
    """Distance of each point to the noiseless half-circle of its own moon."""
    pts = np.asarray(points, dtype=float)
    out = np.empty(len(pts))
    for j, center, sign in ((0, np.zeros(2), 1.0), (1, np.asarray(MOON_OFFSET), -1.0)):
        sel = np.asarray(labels) == j
        rel = pts[sel] - center
        ang = np.arctan2(sign * rel[:, 1], sign * rel[:, 0])
        # closest point on the arc: clamp the polar angle to [0, pi]
        ang = np.where(ang < -np.pi / 2, np.pi, np.clip(ang, 0.0, np.pi))
        nearest = center + sign * MOON_RADIUS * np.column_stack([np.cos(ang), np.sin(ang)])
        out[sel] = np.linalg.norm(pts[sel] - nearest, axis=1)
    return out


def gen_moons(n, noise_sd=0.1, rng_seed=0) -> Dataset:
    """Two interleaved unit half-circles plus isotropic Gaussian noise."""
    if noise_sd < 0:
        raise ParameterError("noise_sd must be non-negative")
    rng = np.random.default_rng(rng_seed)
    n_out, n_in = _split_counts(n, 2)
    t_out = np.linspace(0.0, np.pi, n_out)
    t_in = np.linspace(0.0, np.pi, n_in)
    outer = MOON_RADIUS * np.column_stack([np.cos(t_out), np.sin(t_out)])
    inner = np.asarray(MOON_OFFSET) - MOON_RADIUS * np.column_stack([np.cos(t_in), np.sin(t_in)])
    x = np.vstack([outer, inner])
    if noise_sd > 0:
        x = x + noise_sd * rng.standard_normal(x.shape)
    y = np.concatenate([np.zeros(n_out, int), np.ones(n_in, int)])
    return Dataset(x, y, ["x", "y"], name="moons")


def gen_noisy_blobs(n, noise_fraction=0.1, rng_seed=0, centers=TWO_BLOB_CENTERS, std=BLOB_STD) -> Dataset:
    """Two Gaussian blobs plus uniform background noise labelled -1.

    The noise box spans the blobs' bounding box padded by three standard
    deviations. ``n`` counts the blob points only.
    """
    blobs = gen_blobs(n, centers, std, rng_seed)
    rng = np.random.default_rng([rng_seed, 1])
    n_noise = int(round(noise_fraction * n))
    lo = blobs.features.min(axis=0) - 3 * std
    hi = blobs.features.max(axis=0) + 3 * std
    noise = rng.uniform(lo, hi, size=(n_noise, blobs.m))
    return Dataset(
        np.vstack([blobs.features, noise]),
        np.concatenate([blobs.labels, np.full(n_noise, -1)]),
        ["x", "y"],
        name="noisy_blobs",
    )


GENERATORS = {
    "blob": lambda n, seed, **kw: gen_blobs(n, ((0.0, 0.0),), rng_seed=seed),
    "two-blobs": lambda n, seed, **kw: gen_blobs(n, TWO_BLOB_CENTERS, rng_seed=seed),
    "aniso": lambda n, seed, **kw: gen_aniso(n, rng_seed=seed),
    "moons": lambda n, seed, noise=0.1, **kw: gen_moons(n, noise, rng_seed=seed),
    "noisy-blobs": lambda n, seed, noise=0.1, **kw: gen_noisy_blobs(n, noise, rng_seed=seed),
}
