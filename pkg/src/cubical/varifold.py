"""Planar curves lifted to the Grassmann bundle R^2 x [0, pi), and their quantization.

A line through the origin in the plane is recorded by its angle in
[0, pi), so a curve becomes the set of pairs (x, tangent angle at x).
Upstairs cubes use the theta axis rescaled by 1/pi (``theta_scale="unit"``)
so that all three sides are lengths of the same size; ``"radians"``
keeps theta as is.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import PreconditionError, UnsupportedShapeError
from .shapes import Ball, BoundaryOf, PointCloud, Polygon, Polyline, Shape, sample_boundary

_SCALES = ("unit", "radians")


def wrap_theta(theta):
    """Reduce angles to [0, pi), the identification theta ~ theta + pi."""
    t = np.mod(np.asarray(theta, dtype=float), math.pi)
    # mod can round up to exactly pi
    return np.where(t >= math.pi, 0.0, t)


def theta_difference(a, b):
    """Distance between line directions on the circle [0, pi)."""
    d = np.abs(wrap_theta(a) - wrap_theta(b))
    return np.minimum(d, math.pi - d)


@dataclass(frozen=True)
class GrassmannPoint:
    x: tuple
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "theta", float(wrap_theta(self.theta)))


@dataclass
class LiftedCurve:
    """Ordered samples (x, y, theta) of the tangent lift of a curve."""

    points: np.ndarray
    theta: np.ndarray
    weights: np.ndarray
    spacing: float
    source: str = ""

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        self.theta = wrap_theta(self.theta).ravel()
        self.weights = np.asarray(self.weights, dtype=float).ravel()

    def __len__(self):
        return len(self.points)

    def grassmann_points(self) -> list:
        return [GrassmannPoint(p, t) for p, t in zip(self.points, self.theta)]

    @property
    def length(self) -> float:
        return float(math.fsum(self.weights))

    def upstairs(self, theta_scale: str = "unit") -> np.ndarray:
        t = self.theta / math.pi if _scale(theta_scale) == "unit" else self.theta
        return np.column_stack([self.points, t])

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y", "theta"])
            for (x, y), t in zip(self.points, self.theta):
                w.writerow([f"{x:.12g}", f"{y:.12g}", f"{t:.12g}"])


def _scale(theta_scale):
    if theta_scale not in _SCALES:
        raise PreconditionError(f"theta_scale must be one of {_SCALES}, got {theta_scale!r}")
    return theta_scale


def lift_curve(shape: Shape, spacing: float) -> LiftedCurve:
    """Sample the curve and attach exact tangent angles mod pi.

    A disk (or ball) stands for its boundary circle; polygons and polylines
    are sampled edge by edge with vertices left out, since the tangent is
    undefined there.
    """
    base = shape.base if isinstance(shape, BoundaryOf) else shape
    if not (isinstance(base, (Polygon, Polyline)) or (isinstance(base, Ball) and base.ndim == 2)):
        raise UnsupportedShapeError(f"lift_curve does not support {shape.kind}")
    pc = sample_boundary(base, spacing)
    return LiftedCurve(pc.points, pc.theta, pc.weights, float(spacing), base.kind)


def estimate_tangents(points, radius: float) -> np.ndarray:
    """Tangent angles from the principal axis of each point's ``radius``-neighbourhood."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    tree = cKDTree(pts)
    out = np.zeros(len(pts))
    for i, nb in enumerate(tree.query_ball_point(pts, radius)):
        q = pts[nb] - pts[nb].mean(axis=0)
        if len(q) < 2:
            out[i] = math.nan
            continue
        cov = q.T @ q
        w, v = np.linalg.eigh(cov)
        u = v[:, 1]
        out[i] = math.atan2(u[1], u[0])
    return wrap_theta(out)


def lift_points(points, radius: float, spacing: float | None = None) -> LiftedCurve:
    """Lift a bare point cloud using estimated tangents; unit weights times spacing."""
    pts = np.asarray(points.points if isinstance(points, PointCloud) else points, dtype=float)
    if spacing is None:
        spacing = float(cKDTree(pts).query(pts, k=2)[0][:, 1].max()) if len(pts) > 1 else 0.0
    th = estimate_tangents(pts, radius)
    return LiftedCurve(pts, th, np.full(len(pts), spacing), spacing, "point_cloud")


def monotone_theta_runs(lift: LiftedCurve, closed: bool = True) -> list:
    """Split the (ordered) theta sequence into maximal increasing runs.

    Each run is a ``(start, stop)`` slice; for a closed curve the runs are
    taken cyclically starting right after a wrap.  A counter-clockwise
    circle gives exactly two runs, each sweeping [0, pi): two half-spirals.
    """
    t = lift.theta
    n = len(t)
    if n == 0:
        return []
    if not closed:
        drops = np.flatnonzero(np.diff(t) <= 0) + 1
        cuts = np.concatenate([[0], drops, [n]])
        return [(int(a), int(b)) for a, b in zip(cuts[:-1], cuts[1:])]
    # cyclic: a run starts wherever theta fails to increase from its predecessor
    starts = np.flatnonzero(t <= np.roll(t, 1))
    if len(starts) == 0:
        return [(0, n)]
    runs = []
    for k, a in enumerate(starts):
        b = starts[(k + 1) % len(starts)]
        runs.append((int(a), int(b) if b > a else int(b) + n))
    return runs


@dataclass
class QuantizedVarifold:
    """Weighted depth-d cells of the upstairs space, rows sorted lexicographically."""

    depth: int
    cells: np.ndarray     # (K, 3) int64: ix, iy, itheta
    weights: np.ndarray   # (K,)
    theta_scale: str = "unit"

    @property
    def total_weight(self) -> float:
        return float(math.fsum(self.weights))

    @property
    def side(self) -> float:
        return math.ldexp(1.0, -self.depth)

    def centers(self) -> np.ndarray:
        return np.ldexp(2.0 * self.cells + 1.0, -self.depth - 1)

    def downstairs_cells(self) -> np.ndarray:
        return np.unique(self.cells[:, :2], axis=0)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["d", "ix", "iy", "itheta", "weight"])
            for (ix, iy, it), wt in zip(self.cells, self.weights):
                w.writerow([self.depth, ix, iy, it, f"{wt:.12g}"])


def quantize_lift(lift: LiftedCurve, depth: int, theta_scale: str = "unit",
                  check: bool = True) -> QuantizedVarifold:
    """Bucket lifted samples into depth-d cubes of R^2 x [0, pi).

    Every sample then lies within the half-diagonal sqrt(3) 2^-(d+1) of
    its cell centre.  Cell weight is the arc length carried by the samples
    in it.  The sampling must be at least as fine as 2^-(d+1), otherwise
    curve pieces can slip between samples and :class:`PreconditionError`
    is raised (pass ``check=False`` to skip).
    """
    _scale(theta_scale)
    if depth < 0:
        raise PreconditionError("depth must be non-negative")
    if check and not lift.spacing <= math.ldexp(1.0, -(depth + 1)):
        raise PreconditionError(
            f"lift spacing {lift.spacing:g} exceeds 2^-(d+1) = {math.ldexp(1.0, -(depth + 1)):g}")
    if len(lift) == 0:
        return QuantizedVarifold(depth, np.zeros((0, 3), np.int64), np.zeros(0), theta_scale)
    up = lift.upstairs(theta_scale)
    idx = np.floor(np.ldexp(up, depth)).astype(np.int64)
    cells, inv = np.unique(idx, axis=0, return_inverse=True)
    w = np.zeros(len(cells))
    np.add.at(w, inv.ravel(), lift.weights)
    return QuantizedVarifold(depth, cells, w, theta_scale)


def quantization_deviation(lift: LiftedCurve, q: QuantizedVarifold) -> np.ndarray:
    """Distance of each lifted sample from the centre of its cell, in upstairs units."""
    up = lift.upstairs(q.theta_scale)
    idx = np.floor(np.ldexp(up, q.depth))
    centers = np.ldexp(2.0 * idx + 1.0, -q.depth - 1)
    return np.linalg.norm(up - centers, axis=1)


def varifold_cell_distance(a: QuantizedVarifold, b: QuantizedVarifold) -> float:
    """Total-variation distance between the normalised cell-weight distributions."""
    if a.depth != b.depth:
        raise PreconditionError(f"depth mismatch: {a.depth} vs {b.depth}")
    if a.theta_scale != b.theta_scale:
        raise PreconditionError("theta_scale mismatch")
    wa, wb = a.total_weight, b.total_weight
    if wa == 0 or wb == 0:
        return 0.0 if wa == wb else 1.0
    da = {tuple(c): w / wa for c, w in zip(a.cells.tolist(), a.weights)}
    db = {tuple(c): w / wb for c, w in zip(b.cells.tolist(), b.weights)}
    keys = sorted(set(da) | set(db))
    tv = 0.5 * math.fsum(abs(da.get(k, 0.0) - db.get(k, 0.0)) for k in keys)
    return float(min(tv, 1.0))


def upstairs_distance(a: LiftedCurve, b: LiftedCurve, mode: str = "min",
                      theta_scale: str = "radians", periodic: bool = True) -> float:
    """Distance between two lifts in R^2 x [0, pi).

    ``mode="min"`` is the smallest pairwise distance, ``"hausdorff"`` the
    symmetric Hausdorff distance.  With ``periodic`` the theta axis is a
    circle (theta ~ theta + pi), otherwise the interval [0, pi).
    """
    _scale(theta_scale)
    if mode not in ("min", "hausdorff"):
        raise PreconditionError(f"mode must be 'min' or 'hausdorff', got {mode!r}")
    if len(a) == 0 or len(b) == 0:
        raise PreconditionError("upstairs_distance needs non-empty lifts")
    pa, pb = a.upstairs(theta_scale), b.upstairs(theta_scale)
    period = 1.0 if theta_scale == "unit" else math.pi

    def tree_of(p):
        if not periodic:
            return cKDTree(p), len(p)
        shifts = [0.0, period, -period]
        rep = np.vstack([p + np.array([0.0, 0.0, s]) for s in shifts])
        return cKDTree(rep), len(p)

    ta, _ = tree_of(pa)
    tb, _ = tree_of(pb)
    dab = tb.query(pa)[0]
    if mode == "min":
        return float(dab.min())
    dba = ta.query(pb)[0]
    return float(max(dab.max(), dba.max()))


def hausdorff_distance(a, b) -> float:
    """Symmetric Hausdorff distance between two finite planar point sets."""
    pa = np.asarray(a.points if hasattr(a, "points") else a, dtype=float)
    pb = np.asarray(b.points if hasattr(b, "points") else b, dtype=float)
    return float(max(cKDTree(pb).query(pa)[0].max(), cKDTree(pa).query(pb)[0].max()))
