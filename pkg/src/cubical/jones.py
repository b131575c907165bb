"""Jones beta numbers: thinnest-slab widths on dyadic cubes and the beta^2 sum."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .dyadic import DyadicCube, build_cover
from .errors import PreconditionError
from .shapes import PointCloud


def convex_hull(points) -> np.ndarray:
    """Monotone-chain hull, counter-clockwise, collinear points dropped.

    Degenerate inputs are fine: one point gives one vertex, collinear
    points give the two extremes.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
    if len(pts) > 1:
        keep = np.concatenate([[True], np.any(pts[1:] != pts[:-1], axis=1)])
        pts = pts[keep]
    if len(pts) <= 2:
        return pts
    P = list(zip(pts[:, 0].tolist(), pts[:, 1].tolist()))

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in P:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(P):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def slab_width(points) -> float:
    """Width of the thinnest slab (pair of parallel lines) containing the points.

    The optimal slab has one side flush with a hull edge, so rotating
    calipers over the hull edges give the exact minimum.  Collinear or
    single-point inputs have width 0.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise PreconditionError("slab_width needs at least one point")
    hull = convex_hull(pts)
    h = len(hull)
    if h <= 2:
        return 0.0
    X = hull[:, 0].tolist()
    Y = hull[:, 1].tolist()
    best = math.inf
    j = 1
    for i in range(h):
        ax, ay = X[i], Y[i]
        ex, ey = X[(i + 1) % h] - ax, Y[(i + 1) % h] - ay
        # antipodal pointer only moves forward
        hj = ex * (Y[j % h] - ay) - ey * (X[j % h] - ax)
        while True:
            k = (j + 1) % h
            hk = ex * (Y[k] - ay) - ey * (X[k] - ax)
            if hk <= hj:
                break
            j, hj = j + 1, hk
        best = min(best, hj / math.hypot(ex, ey))
    return float(max(best, 0.0))


def slab_width_sweep(points, n_angles: int = 100_000, refine: bool = True) -> float:
    """Brute-force width: minimise the projected extent over sampled directions.

    The extent is piecewise sinusoidal in the angle, so a uniform sweep is
    followed by golden-section refinement around every near-minimal sample.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise PreconditionError("slab_width_sweep needs at least one point")
    pts = pts - pts.mean(axis=0)

    def extent(t):
        t = np.atleast_1d(t)
        proj = np.cos(t)[:, None] * pts[:, 0] + np.sin(t)[:, None] * pts[:, 1]
        return proj.max(axis=1) - proj.min(axis=1)

    t = np.linspace(0.0, math.pi, n_angles, endpoint=False)
    vals = np.concatenate([extent(c) for c in np.array_split(t, max(1, n_angles // 2000))])
    best = float(vals.min())
    if not refine:
        return best
    step = math.pi / n_angles
    # the extent has period pi; seed at every near-minimal local minimum
    is_min = (vals <= np.roll(vals, 1)) & (vals <= np.roll(vals, -1))
    near = vals <= best + 1e-9 + 1e-3 * (vals.max() - best)
    seeds = np.flatnonzero(is_min & near)
    for s in seeds[:200]:
        lo, hi = t[s] - step, t[s] + step
        g = (math.sqrt(5) - 1) / 2
        for _ in range(60):
            m1, m2 = hi - g * (hi - lo), lo + g * (hi - lo)
            if extent(m1)[0] <= extent(m2)[0]:
                hi = m2
            else:
                lo = m1
        best = min(best, float(extent(0.5 * (lo + hi))[0]))
    return best


def _points_of(samples):
    if isinstance(samples, PointCloud):
        return samples.points
    return np.asarray(samples, dtype=float).reshape(-1, 2)


def sample_spacing(samples) -> float:
    """Declared spacing of a sample cloud, else the largest nearest-neighbour gap."""
    if isinstance(samples, PointCloud) and samples.spacing is not None:
        return float(samples.spacing)
    pts = _points_of(samples)
    if len(pts) < 2:
        return 0.0
    d, _ = cKDTree(pts).query(pts, k=2)
    return float(d[:, 1].max())


class _CellIndex:
    """Samples bucketed by their floor cell at one depth."""

    def __init__(self, pts, depth):
        self.pts = pts
        self.depth = depth
        cells = np.floor(np.ldexp(pts, depth)).astype(np.int64)
        order = np.lexsort((cells[:, 1], cells[:, 0]))
        cells = cells[order]
        self.order = order
        keys, start = np.unique(cells, axis=0, return_index=True)
        stop = np.append(start[1:], len(cells))
        self.keys = keys
        self.buckets = {(int(k[0]), int(k[1])): (a, b) for k, a, b in zip(keys, start, stop)}

    def in_box(self, m, lo_off, hi_off):
        """Samples in the closed box spanned by cells ``m+lo_off .. m+hi_off``."""
        h = math.ldexp(1.0, -self.depth)
        idx = []
        for i in range(m[0] + lo_off - 1, m[0] + hi_off + 1):
            for j in range(m[1] + lo_off - 1, m[1] + hi_off + 1):
                ab = self.buckets.get((i, j))
                if ab is not None:
                    idx.append(self.order[ab[0]:ab[1]])
        if not idx:
            return np.zeros((0, 2))
        p = self.pts[np.concatenate(idx)]
        lo = np.array([m[0] + lo_off, m[1] + lo_off], float) * h
        hi = np.array([m[0] + hi_off, m[1] + hi_off], float) * h
        keep = np.all((p >= lo) & (p <= hi), axis=1)
        return p[keep]


def beta_of_cube(samples, cube: DyadicCube, tripled: bool = True) -> float:
    """Beta number of the sampled set on ``3C`` (default) or on ``C`` itself.

    With ``tripled`` the width of the samples in the closed cube 3C is
    divided by ``l(3C)``; otherwise the samples in the closed cube C are
    used and divided by ``l(C)``.  No samples means beta 0.
    """
    pts = _points_of(samples)
    if cube.ndim != 2:
        raise PreconditionError("beta numbers are implemented for planar samples only")
    m = tuple(int(v) for v in cube.index)
    cell = _CellIndex(pts, cube.depth)
    if tripled:
        sub, side = cell.in_box(m, -1, 2), 3 * cube.side
    else:
        sub, side = cell.in_box(m, 0, 1), cube.side
    if len(sub) == 0:
        return 0.0
    return slab_width(sub) / side


@dataclass
class BetaReport:
    """Per-cube widths and the truncated beta^2 sum over ``[d_min, d_max]``."""

    d_min: int
    d_max: int
    spacing: float
    rows: list = field(default_factory=list)          # (d, m1, m2, W, beta)
    per_depth: dict = field(default_factory=dict)     # d -> sum beta^2 l(C)
    spacing_ok: dict = field(default_factory=dict)    # d -> spacing <= 2^-(d+2)

    @property
    def beta_squared_sum(self) -> float:
        return float(math.fsum(self.per_depth.values()))

    def subtotal_ratios(self) -> list:
        d = sorted(self.per_depth)
        return [self.per_depth[b] / self.per_depth[a] if self.per_depth[a] > 0 else math.nan
                for a, b in zip(d[:-1], d[1:])]

    @property
    def warnings(self) -> list:
        return [f"sample spacing {self.spacing:.3g} exceeds 2^-(d+2) at depth {d}"
                for d, ok in sorted(self.spacing_ok.items()) if not ok]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["d", "m1", "m2", "W", "beta"])
            for d, m1, m2, W, b in self.rows:
                w.writerow([d, m1, m2, f"{W:.12g}", f"{b:.12g}"])

    def summary(self) -> dict:
        return {
            "d_min": self.d_min,
            "d_max": self.d_max,
            "spacing": self.spacing,
            "per_depth": {str(d): v for d, v in sorted(self.per_depth.items())},
            "total": self.beta_squared_sum,
            "truncated": True,
            "warnings": self.warnings,
        }

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2)


def beta_squared_sum(samples, d_min: int, d_max: int, tripled: bool = True) -> BetaReport:
    """Truncated sum of ``beta(3C)^2 l(C)`` over cubes meeting the samples.

    Only depths ``d_min..d_max`` are visited and each depth's subtotal is
    reported separately.  A depth whose cells are finer than four sample
    spacings is flagged in ``warnings`` but still computed.
    """
    if d_min > d_max:
        raise PreconditionError(f"d_min={d_min} exceeds d_max={d_max}")
    pts = _points_of(samples)
    spacing = sample_spacing(samples)
    rep = BetaReport(int(d_min), int(d_max), spacing)
    for d in range(d_min, d_max + 1):
        rep.spacing_ok[d] = spacing <= math.ldexp(1.0, -(d + 2))
        if len(pts) == 0:
            rep.per_depth[d] = 0.0
            continue
        cell = _CellIndex(pts, d)
        side = math.ldexp(1.0, -d)
        terms = []
        # closed cubes: a sample on a lattice line meets every abutting cube
        for key in build_cover(PointCloud(pts), d).indices:
            m = (int(key[0]), int(key[1]))
            if tripled:
                sub, norm = cell.in_box(m, -1, 2), 3 * side
            else:
                sub, norm = cell.in_box(m, 0, 1), side
            W = slab_width(sub)
            b = W / norm
            rep.rows.append((d, m[0], m[1], W, b))
            terms.append(b * b * side)
        rep.per_depth[d] = float(math.fsum(terms))
    return rep
