"""Small SVG writers for covers, lifts and flat norm decompositions (256 px per unit)."""
from __future__ import annotations

import math

import numpy as np

PX = 256.0


class _Canvas:
    def __init__(self, lo, hi, margin=8.0):
        self.lo = np.asarray(lo, float)
        self.hi = np.asarray(hi, float)
        self.m = margin
        self.items = []

    def x(self, v):
        return self.m + (v - self.lo[0]) * PX

    def y(self, v):
        # svg y grows downward
        return self.m + (self.hi[1] - v) * PX

    def rect(self, x0, y0, x1, y1, fill, opacity=1.0):
        self.items.append(
            f'<rect x="{self.x(x0):.3f}" y="{self.y(y1):.3f}" width="{(x1 - x0) * PX:.3f}" '
            f'height="{(y1 - y0) * PX:.3f}" fill="{fill}" fill-opacity="{opacity:g}"/>')

    def line(self, a, b, stroke, width=1.0):
        self.items.append(
            f'<line x1="{self.x(a[0]):.3f}" y1="{self.y(a[1]):.3f}" x2="{self.x(b[0]):.3f}" '
            f'y2="{self.y(b[1]):.3f}" stroke="{stroke}" stroke-width="{width:g}"/>')

    def polyline(self, pts, stroke, width=1.0):
        p = " ".join(f"{self.x(a):.3f},{self.y(b):.3f}" for a, b in pts)
        self.items.append(f'<polyline points="{p}" fill="none" stroke="{stroke}" stroke-width="{width:g}"/>')

    def dots(self, pts, fill, r=1.0):
        for a, b in pts:
            self.items.append(f'<circle cx="{self.x(a):.3f}" cy="{self.y(b):.3f}" r="{r:g}" fill="{fill}"/>')

    def render(self, extra_width=0.0):
        w = (self.hi[0] - self.lo[0]) * PX + 2 * self.m + extra_width
        h = (self.hi[1] - self.lo[1]) * PX + 2 * self.m
        body = "\n".join(self.items)
        return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0f}" height="{h:.0f}" '
                f'viewBox="0 0 {w:.3f} {h:.3f}">\n{body}\n</svg>\n')


def cover_svg(cover, boundary=None, max_cells=200_000) -> str:
    """Cover cells filled grey, boundary faces stroked black (2-D covers only)."""
    if cover.ndim != 2:
        raise ValueError("SVG rendering is for planar covers")
    h = cover.side
    idx = cover.indices
    if len(idx) == 0:
        return _Canvas((0, 0), (1, 1)).render()
    lo = idx.min(axis=0) * h
    hi = (idx.max(axis=0) + 1) * h
    cv = _Canvas(lo, hi)
    if len(idx) <= max_cells:
        for i, j in idx:
            cv.rect(i * h, j * h, (i + 1) * h, (j + 1) * h, "#bbbbbb")
    if boundary is not None:
        for base, ax in zip(boundary.base_index, boundary.axis):
            a = base.astype(float) * h
            b = a.copy()
            b[1 - ax] += h
            cv.line(a, b, "black", 1.0)
    return cv.render()


def lift_svg(lift) -> str:
    """Trace downstairs on the left, theta against arc length on the right."""
    pts = lift.points
    if len(pts) == 0:
        return _Canvas((0, 0), (1, 1)).render()
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = max(hi[1] - lo[1], 1e-9)
    cv = _Canvas(lo, np.array([hi[0], lo[1] + span]))
    cv.dots(pts, "#1f77b4", 0.8)
    s = np.cumsum(lift.weights) - 0.5 * lift.weights
    total = max(s[-1] if len(s) else 1.0, 1e-12)
    # strip: arc length mapped to [0, width], theta/pi to [0, span]
    width = max(hi[0] - lo[0], 0.5)
    offset = hi[0] + 0.1
    strip = np.column_stack([offset + s / total * width, lo[1] + lift.theta / math.pi * span])
    cv.hi = np.array([offset + width, lo[1] + span])
    cv.line((offset, lo[1]), (offset + width, lo[1]), "black", 0.5)
    cv.line((offset, lo[1]), (offset, lo[1] + span), "black", 0.5)
    cv.dots(strip, "#d62728", 0.8)
    return cv.render()


def flatnorm_svg(dec) -> str:
    """S shaded, original boundary red, residual boundary green."""
    h = dec.side
    E, F = dec.E, dec.F
    if E.size == 0:
        return _Canvas((0, 0), (1, 1)).render()
    lo = (dec.offset - 1) * h
    hi = (dec.offset + np.array(E.shape) + 1) * h
    cv = _Canvas(lo, hi)
    for i, j in np.argwhere(E ^ F):
        x, y = (dec.offset[0] + i) * h, (dec.offset[1] + j) * h
        cv.rect(x, y, x + h, y + h, "#2ca02c", 0.35)
    for mask, colour in ((E, "#d62728"), (F, "#2ca02c")):
        p = np.pad(mask, 1)
        for i, j in np.argwhere(p[:-1, :] != p[1:, :]):
            x, y = (dec.offset[0] + i) * h, (dec.offset[1] + j - 1) * h
            cv.line((x, y), (x, y + h), colour, 1.0)
        for i, j in np.argwhere(p[:, :-1] != p[:, 1:]):
            x, y = (dec.offset[0] + i - 1) * h, (dec.offset[1] + j) * h
            cv.line((x, y), (x + h, y), colour, 1.0)
    return cv.render()
