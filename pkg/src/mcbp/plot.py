"""Minimal, deterministic SVG scatter plots for 2-D data.

Three views of a curvature run: the raw points, the normalized scores on a
blue-to-red ramp and the boundary points drawn black over the rest.
Coordinates are printed with fixed precision so the same input always
produces the same bytes.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError

SIZE = 480
MARGIN = 24
RADIUS = 2.5
BLUE = (49, 54, 149)
RED = (215, 48, 39)
GREY = "#9e9e9e"
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf")


def ramp(t) -> list[str]:
    """Linear blue-to-red colours for values in [0, 1]."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    lo, hi = np.array(BLUE, dtype=float), np.array(RED, dtype=float)
    rgb = np.rint(lo + t[:, None] * (hi - lo)).astype(int)
    return ["#%02x%02x%02x" % tuple(c) for c in rgb]


def _screen(points):
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DimensionError(f"SVG plots need 2-D points, got shape {pts.shape}")
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = float(np.max(hi - lo)) or 1.0
    scale = (SIZE - 2 * MARGIN) / span
    xs = MARGIN + (pts[:, 0] - lo[0]) * scale
    ys = SIZE - MARGIN - (pts[:, 1] - lo[1]) * scale  # SVG y grows downwards
    return xs, ys


def scatter_svg(points, colors, title: str = "", version: str = "", order=None) -> str:
    """SVG document with one circle per point; ``order`` sets drawing order."""
    xs, ys = _screen(points)
    idx = range(len(xs)) if order is None else order
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">',
    ]
    if version:
        out.append(f"<!-- mcbp {version} -->")
    out.append(f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>')
    if title:
        out.append(f'<text x="{MARGIN}" y="{MARGIN - 8}" font-family="sans-serif" font-size="12">{_escape(title)}</text>')
    for i in idx:
        out.append(f'<circle cx="{xs[i]:.2f}" cy="{ys[i]:.2f}" r="{RADIUS}" fill="{colors[i]}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def raw_scatter(points, labels=None, **kw) -> str:
    if labels is None:
        colors = [PALETTE[0]] * len(points)
    else:
        colors = [GREY if lab < 0 else PALETTE[lab % len(PALETTE)] for lab in np.asarray(labels, dtype=int)]
    return scatter_svg(points, colors, **kw)


def curvature_heatmap(points, scores, **kw) -> str:
    # high scores drawn last so they stay visible
    order = np.argsort(np.asarray(scores), kind="stable")
    return scatter_svg(points, ramp(scores), order=order, **kw)


def boundary_overlay(points, flags, **kw) -> str:
    flags = np.asarray(flags, dtype=bool)
    colors = np.where(flags, "#000000", GREY).tolist()
    order = np.concatenate([np.nonzero(~flags)[0], np.nonzero(flags)[0]])
    return scatter_svg(points, colors, order=order, **kw)
