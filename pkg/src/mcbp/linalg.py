"""Dense symmetric linear algebra.

Matrices are plain float64 ``numpy`` arrays. The local eigenproblems solved
per sample are small (m <= 50), so they go through a cyclic Jacobi solver
that is vectorised over a batch of matrices; only the global PCA step, whose
size follows the raw feature count, is delegated to LAPACK.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import DegeneratePatchError, DimensionError, ParameterError, SymmetryError

if TYPE_CHECKING:
    from .data import Dataset

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted non-increasing; ``eigenvectors[:, j]`` pairs with ``eigenvalues[j]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0


def as_matrix(a, name="matrix") -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} contains NaN or Inf")
    return arr


def _rotate_pair(a, v, p, q):
    """Apply one Jacobi rotation zeroing a[p, q] on every matrix of the batch.

    Arrays are laid out batch-last, ``(m, m, b)``, so every slice is contiguous.
    """
    apq = a[p, q]
    nz = apq != 0.0
    if not nz.any():
        return
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        theta = np.where(nz, (a[q, q] - a[p, p]) / (2.0 * apq), 0.0)
        t = np.where(theta >= 0.0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
    t = np.where(nz, t, 0.0)
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c

    col_p = a[:, p].copy()
    col_q = a[:, q].copy()
    a[:, p] = c * col_p - s * col_q
    a[:, q] = s * col_p + c * col_q
    row_p = a[p].copy()
    row_q = a[q].copy()
    a[p] = c * row_p - s * row_q
    a[q] = s * row_p + c * row_q
    a[p, q] = 0.0
    a[q, p] = 0.0

    vp = v[:, p].copy()
    vq = v[:, q].copy()
    v[:, p] = c * vp - s * vq
    v[:, q] = s * vp + c * vq


def _off_norm(a):
    """Frobenius norm of the off-diagonal part, per matrix of a batch-last stack."""
    off = a.copy()
    idx = np.arange(a.shape[0])
    off[idx, idx] = 0.0
    return np.sqrt(np.einsum("ijb,ijb->b", off, off))


def canonical_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so the largest-magnitude entry of each is positive.

    Works on a single ``(m, m)`` matrix or a ``(b, m, m)`` batch.
    """
    vec = np.array(vectors, dtype=float, copy=True)
    single = vec.ndim == 2
    if single:
        vec = vec[None]
    pivot = np.argmax(np.abs(vec), axis=1)  # (b, m): row of the biggest entry per column
    picked = np.take_along_axis(vec, pivot[:, None, :], axis=1)[:, 0, :]
    flip = np.where(picked < 0.0, -1.0, 1.0)
    vec *= flip[:, None, :]
    return vec[0] if single else vec


def batched_sym_eig(mats: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi on a stack of symmetric matrices.

    Returns ``(eigenvalues (b, m), eigenvectors (b, m, m), sweeps)``, ordered
    and sign-normalised like :func:`sym_eig`. Inputs are assumed symmetric.
    """
    a = np.array(mats, dtype=float, copy=True)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise DimensionError(f"expected a (b, m, m) stack, got shape {a.shape}")
    b, m, _ = a.shape
    scale = np.sqrt(np.einsum("bij,bij->b", a, a))
    a = np.ascontiguousarray(np.moveaxis(a, 0, -1))
    v = np.repeat(np.eye(m)[:, :, None], b, axis=2)
    pairs = [(p, q) for p in range(m - 1) for q in range(p + 1, m)]

    sweeps = 0
    for _ in range(max_sweeps):
        active = np.nonzero(_off_norm(a) >= tol * scale)[0]
        # exactly-zero matrices have scale 0 and off-norm 0, so they drop out here
        active = active[scale[active] > 0.0]
        if active.size == 0:
            break
        sub_a = np.ascontiguousarray(a[:, :, active])
        sub_v = np.ascontiguousarray(v[:, :, active])
        for p, q in pairs:
            _rotate_pair(sub_a, sub_v, p, q)
        a[:, :, active] = sub_a
        v[:, :, active] = sub_v
        sweeps += 1

    a = np.moveaxis(a, -1, 0)
    v = np.moveaxis(v, -1, 0)
    vals = np.einsum("bii->bi", a).copy()
    order = np.argsort(-vals, axis=1, kind="stable")
    vals = np.take_along_axis(vals, order, axis=1)
    vecs = np.take_along_axis(v, order[:, None, :], axis=2)
    return vals, canonical_signs(vecs), sweeps


def sym_eig(a) -> EigenDecomposition:
    """Eigendecomposition of a real symmetric matrix.

    Ties between equal eigenvalues keep the solver's column order and every
    eigenvector is sign-normalised (largest-magnitude entry positive), so the
    output is deterministic for identical input.
    """
    arr = as_matrix(a)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"sym_eig needs a square matrix, got shape {arr.shape}")
    fro = np.linalg.norm(arr)
    if np.linalg.norm(arr - arr.T) > 1e-9 * fro:
        raise SymmetryError("sym_eig needs a symmetric matrix")
    arr = 0.5 * (arr + arr.T)
    vals, vecs, sweeps = batched_sym_eig(arr[None])
    return EigenDecomposition(vals[0], vecs[0], sweeps)


def covariance(patch, center) -> np.ndarray:
    """Local covariance of a patch about its centre point.

    ``patch`` is ``m x (k+1)`` with one sample per column; the centre column
    contributes zero, and the sum is divided by ``k``.
    """
    p = as_matrix(patch, "patch")
    c = np.asarray(center, dtype=float).reshape(-1)
    if c.shape[0] != p.shape[0]:
        raise DimensionError(f"center has length {c.shape[0]}, patch has {p.shape[0]} rows")
    k = p.shape[1] - 1
    if k < 1:
        raise DegeneratePatchError("a patch needs at least one neighbour (k >= 1)")
    diff = p - c[:, None]
    return diff @ diff.T / k


def patch_covariances(points: np.ndarray, neighbors: np.ndarray, centers: np.ndarray | None = None) -> np.ndarray:
    """Covariances of many patches at once.

    ``neighbors`` is ``(b, k)`` row indices into ``points``; ``centers`` is the
    ``(b, m)`` patch centres and defaults to ``points`` itself (b == n).
    """
    k = neighbors.shape[1]
    if k < 1:
        raise DegeneratePatchError("a patch needs at least one neighbour (k >= 1)")
    if centers is None:
        centers = points
    diff = points[neighbors] - centers[:, None, :]
    return np.einsum("nki,nkj->nij", diff, diff) / k


def pca_project(data: Dataset, d: int) -> Dataset:
    """Project onto the top-``d`` principal axes of the global sample covariance."""
    x = data.features
    n, m = x.shape
    if not 1 <= d <= min(m, n - 1):
        raise ParameterError(f"PCA dimension d={d} outside [1, {min(m, n - 1)}]")
    xc = x - x.mean(axis=0)
    if m <= n:
        cov = xc.T @ xc / (n - 1)
        vals, vecs = np.linalg.eigh(0.5 * (cov + cov.T))
        order = np.argsort(-vals, kind="stable")[:d]
        axes = vecs[:, order]
    else:
        # fewer samples than features: diagonalise the n x n Gram matrix instead
        gram = xc @ xc.T
        vals, vecs = np.linalg.eigh(0.5 * (gram + gram.T))
        order = np.argsort(-vals, kind="stable")[:d]
        axes = xc.T @ vecs[:, order]
        axes /= np.linalg.norm(axes, axis=0)
    axes = canonical_signs(axes)
    proj = xc @ axes
    return data.replace(
        features=proj,
        feature_names=[f"pc{j + 1}" for j in range(d)],
        provenance=f"pca({d})",
    )
