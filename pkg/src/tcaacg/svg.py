"""Minimal self-contained SVG figures: heatmaps and scatter plots."""

from __future__ import annotations

import math
from html import escape

import numpy as np

# viridis-like ramp, sampled at 6 stops
_STOPS = np.array(
    [
        [68, 1, 84],
        [65, 68, 135],
        [42, 120, 142],
        [34, 168, 132],
        [122, 209, 81],
        [253, 231, 37],
    ],
    dtype=float,
)
PERIOD_COLORS = {1: "#1b9e9e", 2: "#5fd3f3", 4: "#9a9a2e", 8: "#f39c34"}
MISSING = "#ffffff"


def color(x: float) -> str:
    """Color for ``x`` in [0, 1] (clipped)."""
    x = min(1.0, max(0.0, x)) * (len(_STOPS) - 1)
    i = min(int(x), len(_STOPS) - 2)
    c = _STOPS[i] + (x - i) * (_STOPS[i + 1] - _STOPS[i])
    return "#%02x%02x%02x" % tuple(int(round(v)) for v in c)


def _fmt(v):
    return f"{v:.3g}"


def _frame(w, h, title):
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<text x="{w / 2}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
    ]


def heatmap(values, x, y, title, xlabel, ylabel, vrange=None, categorical=None) -> str:
    """``values[iy, ix]`` over grid vectors ``x`` and ``y``; NaN cells are blank.

    ``categorical`` maps integer values to colors and replaces the color bar
    with a legend.
    """
    values = np.asarray(values, dtype=float)
    ny, nx = values.shape
    W, H, left, top, pw, ph = 640, 480, 70, 30, 440, 390
    cw, ch = pw / nx, ph / ny
    if vrange is None:
        finite = values[np.isfinite(values)]
        vrange = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    lo, hi = vrange
    span = hi - lo if hi > lo else 1.0
    out = _frame(W, H, title)
    for iy in range(ny):
        for ix in range(nx):
            v = values[iy, ix]
            if not math.isfinite(v):
                continue
            if categorical is not None:
                fill = categorical.get(int(v), "#888888")
            else:
                fill = color((v - lo) / span)
            px = left + ix * cw
            py = top + (ny - 1 - iy) * ch
            out.append(
                f'<rect x="{px:.2f}" y="{py:.2f}" width="{cw + 0.05:.2f}" height="{ch + 0.05:.2f}" fill="{fill}"/>'
            )
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        xv = x[0] + frac * (x[-1] - x[0])
        px = left + frac * pw
        out.append(f'<line x1="{px}" y1="{top + ph}" x2="{px}" y2="{top + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{px}" y="{top + ph + 16}" text-anchor="middle">{_fmt(xv)}</text>')
        yv = y[0] + frac * (y[-1] - y[0])
        py = top + ph - frac * ph
        out.append(f'<line x1="{left - 4}" y1="{py}" x2="{left}" y2="{py}" stroke="black"/>')
        out.append(f'<text x="{left - 6}" y="{py + 4}" text-anchor="end">{_fmt(yv)}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{H - 8}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="14" y="{top + ph / 2}" text-anchor="middle" '
        f'transform="rotate(-90 14 {top + ph / 2})">{escape(ylabel)}</text>'
    )
    bx = left + pw + 30
    if categorical is not None:
        for i, (key, fill) in enumerate(categorical.items()):
            yy = top + 10 + 20 * i
            out.append(f'<rect x="{bx}" y="{yy}" width="14" height="14" fill="{fill}"/>')
            out.append(f'<text x="{bx + 20}" y="{yy + 11}">period {key}</text>')
    else:
        n = 50
        for i in range(n):
            yy = top + ph - (i + 1) * ph / n
            out.append(
                f'<rect x="{bx}" y="{yy:.2f}" width="16" height="{ph / n + 0.05:.2f}" fill="{color(i / (n - 1))}"/>'
            )
        out.append(f'<text x="{bx + 22}" y="{top + ph}">{_fmt(lo)}</text>')
        out.append(f'<text x="{bx + 22}" y="{top + 10}">{_fmt(hi)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def scatter(series, title, xlabel, ylabel) -> str:
    """``series``: list of ``(label, color, xs, ys)``."""
    W, H, left, top, pw, ph = 640, 480, 70, 30, 420, 390
    xs = np.concatenate([np.asarray(s[2], dtype=float) for s in series] + [np.zeros(0)])
    ys = np.concatenate([np.asarray(s[3], dtype=float) for s in series] + [np.zeros(0)])
    x0, x1 = (float(xs.min()), float(xs.max())) if xs.size else (0.0, 1.0)
    y0, y1 = (float(ys.min()), float(ys.max())) if ys.size else (0.0, 1.0)
    x1 = x1 if x1 > x0 else x0 + 1.0
    y1 = y1 if y1 > y0 else y0 + 1.0
    out = _frame(W, H, title)
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for label, fill, sx, sy in series:
        for a, b in zip(sx, sy):
            px = left + (a - x0) / (x1 - x0) * pw
            py = top + ph - (b - y0) / (y1 - y0) * ph
            out.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="2.5" fill="{fill}"/>')
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        px = left + frac * pw
        out.append(f'<text x="{px}" y="{top + ph + 16}" text-anchor="middle">{_fmt(x0 + frac * (x1 - x0))}</text>')
        py = top + ph - frac * ph
        out.append(f'<text x="{left - 6}" y="{py + 4}" text-anchor="end">{_fmt(y0 + frac * (y1 - y0))}</text>')
    for i, (label, fill, *_rest) in enumerate(series):
        yy = top + 10 + 20 * i
        out.append(f'<circle cx="{left + pw + 20}" cy="{yy + 5}" r="5" fill="{fill}"/>')
        out.append(f'<text x="{left + pw + 30}" y="{yy + 9}">{escape(label)}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{H - 8}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="14" y="{top + ph / 2}" text-anchor="middle" '
        f'transform="rotate(-90 14 {top + ph / 2})">{escape(ylabel)}</text>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"
