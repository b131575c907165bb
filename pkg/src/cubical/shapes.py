"""Bounded sets with exact dyadic-cube predicates.

Membership semantics
--------------------
Solid shapes (balls, ball unions, polygons, the dense unit cube, implicit
sets) are regular closed sets, and a cube belongs to their cover when it
meets the set in positive volume: the open cube meets the interior.  Thin
shapes (polylines, point clouds, the boundary of a solid) have no interior;
for them a closed cube belongs to the cover as soon as it touches the set,
so a sample on a lattice hyperplane belongs to every abutting cube.

Every predicate is decided per cell with arithmetic on exact dyadic corner
coordinates.  For inputs with few significant bits (dyadic vertices,
centres and radii) the decisions are exact; for generic floats the only
possible misclassifications are at measure-zero tangencies.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import gamma

from .dyadic import DyadicCube
from .errors import PreconditionError, UnsupportedShapeError

_CHUNK = 1 << 22


def unit_ball_volume(k: float) -> float:
    """Volume of the unit ball in R^k (``alpha(k)``), defined for real k >= 0."""
    return math.pi ** (k / 2) / gamma(k / 2 + 1)


def _axis_cells(depth, ilo, counts):
    """Per-axis lower and upper cell coordinates for an index box."""
    los, his = [], []
    for a, c in zip(ilo, counts):
        m = np.arange(int(a), int(a) + int(c), dtype=np.int64)
        los.append(np.ldexp(m.astype(float), -depth))
        his.append(np.ldexp((m + 1).astype(float), -depth))
    return los, his


def _outer_sum(parts, counts):
    """Broadcast sum of per-axis arrays, yielded in chunks along axis 0."""
    n = len(parts)
    rest = int(np.prod(counts[1:])) if n > 1 else 1
    step = max(1, _CHUNK // max(rest, 1))
    tail = None
    for j in range(1, n):
        shape = [1] * (n - 1)
        shape[j - 1] = counts[j]
        v = parts[j].reshape(shape)
        tail = v if tail is None else tail + v
    for s in range(0, counts[0], step):
        head = parts[0][s:s + step].reshape((-1,) + (1,) * (n - 1))
        yield s, (head if tail is None else head + tail)


def _ball_cell_mask(center, r, depth, ilo, counts, mode, clip=None):
    """Cells of an index box against one ball.

    ``mode`` is ``"open"`` (cube meets the ball in positive volume),
    ``"sphere"`` (closed cube touches the bounding sphere).
    """
    counts = tuple(int(c) for c in counts)
    los, his = _axis_cells(depth, ilo, counts)
    valid = None
    if clip is not None:
        clo, chi = clip
        valid_parts = []
        for j in range(len(los)):
            lo = np.maximum(los[j], clo[j])
            hi = np.minimum(his[j], chi[j])
            valid_parts.append(lo < hi)
            los[j], his[j] = lo, hi
        valid = valid_parts
    near = [np.maximum(np.maximum(lo - c, c - hi), 0.0) ** 2 for lo, hi, c in zip(los, his, center)]
    out = np.zeros(counts, dtype=bool)
    r2 = r * r
    if mode == "open":
        for s, tot in _outer_sum(near, counts):
            out[s:s + tot.shape[0]] = tot < r2
    else:
        far = [np.maximum((lo - c) ** 2, (hi - c) ** 2) for lo, hi, c in zip(los, his, center)]
        for (s, tn), (_, tf) in zip(_outer_sum(near, counts), _outer_sum(far, counts)):
            out[s:s + tn.shape[0]] = (tn <= r2) & (tf >= r2)
    if valid is not None:
        ok = None
        for j, v in enumerate(valid):
            shape = [1] * len(counts)
            shape[j] = counts[j]
            v = v.reshape(shape)
            ok = v if ok is None else ok & v
        out &= ok
    return out


def _sub_box(ilo, counts, blo, bhi, depth):
    """Intersect the index box with the cells overlapping the box [blo, bhi]."""
    a = np.floor(np.ldexp(np.asarray(blo, float), depth)).astype(np.int64) - 1
    b = np.floor(np.ldexp(np.asarray(bhi, float), depth)).astype(np.int64) + 1
    ilo = np.asarray(ilo, dtype=np.int64)
    top = ilo + np.asarray(counts, dtype=np.int64) - 1
    a = np.maximum(a, ilo)
    b = np.minimum(b, top)
    if np.any(b < a):
        return None
    return a, tuple(int(x) for x in (b - a + 1))


def _paste(out, ilo, sub_lo, sub_mask):
    sl = tuple(slice(int(s - o), int(s - o) + c) for s, o, c in zip(sub_lo, ilo, sub_mask.shape))
    out[sl] |= sub_mask


# -- segment geometry --------------------------------------------------------

def _seg_box_hit(p, q, lo, hi, open_box):
    """Does the segment pq meet the box [lo, hi] (closed) or (lo, hi) (open)?

    Separating-axis test over the two coordinate axes and the segment
    normal.  ``lo``/``hi`` are ``(N, 2)`` arrays.
    """
    minx, maxx = min(p[0], q[0]), max(p[0], q[0])
    miny, maxy = min(p[1], q[1]), max(p[1], q[1])
    dx, dy = q[0] - p[0], q[1] - p[1]
    if open_box:
        sep = (maxx <= lo[:, 0]) | (minx >= hi[:, 0]) | (maxy <= lo[:, 1]) | (miny >= hi[:, 1])
    else:
        sep = (maxx < lo[:, 0]) | (minx > hi[:, 0]) | (maxy < lo[:, 1]) | (miny > hi[:, 1])
    if dx != 0.0 or dy != 0.0:
        cs = [dx * (cy - p[1]) - dy * (cx - p[0])
              for cx in (lo[:, 0], hi[:, 0]) for cy in (lo[:, 1], hi[:, 1])]
        cs = np.stack(cs, axis=1)
        if open_box:
            sep |= np.all(cs >= 0, axis=1) | np.all(cs <= 0, axis=1)
        else:
            sep |= np.all(cs > 0, axis=1) | np.all(cs < 0, axis=1)
    return ~sep


def _segment_candidates(p, q, depth):
    """Superset of the cells (closed) touched by the segment pq."""
    major = 0 if abs(q[0] - p[0]) >= abs(q[1] - p[1]) else 1
    minor = 1 - major
    a0, a1 = sorted((p[major], q[major]))
    i0 = int(math.floor(math.ldexp(a0, depth))) - 1
    i1 = int(math.floor(math.ldexp(a1, depth)))
    i = np.arange(i0, i1 + 1, dtype=np.int64)
    clo = np.clip(np.ldexp(i.astype(float), -depth), a0, a1)
    chi = np.clip(np.ldexp((i + 1).astype(float), -depth), a0, a1)
    dmaj = q[major] - p[major]
    if dmaj == 0.0:
        b_lo = np.full(i.shape, min(p[minor], q[minor]))
        b_hi = np.full(i.shape, max(p[minor], q[minor]))
    else:
        slope = (q[minor] - p[minor]) / dmaj
        ya = p[minor] + (clo - p[major]) * slope
        yb = p[minor] + (chi - p[major]) * slope
        b_lo, b_hi = np.minimum(ya, yb), np.maximum(ya, yb)
    j0 = np.floor(np.ldexp(b_lo, depth)).astype(np.int64) - 1
    j1 = np.floor(np.ldexp(b_hi, depth)).astype(np.int64) + 1
    reps = j1 - j0 + 1
    maj = np.repeat(i, reps)
    start = np.repeat(j0, reps)
    offs = np.arange(reps.sum()) - np.repeat(np.cumsum(reps) - reps, reps)
    mnr = start + offs
    cells = np.empty((len(maj), 2), dtype=np.int64)
    cells[:, major] = maj
    cells[:, minor] = mnr
    return cells


def _segments_cell_mask(segments, depth, ilo, counts, open_box):
    out = np.zeros(tuple(int(c) for c in counts), dtype=bool)
    ilo = np.asarray(ilo, dtype=np.int64)
    top = ilo + np.asarray(counts, dtype=np.int64)
    for p, q in segments:
        cells = _segment_candidates(p, q, depth)
        keep = np.all((cells >= ilo) & (cells < top), axis=1)
        cells = cells[keep]
        if len(cells) == 0:
            continue
        lo = np.ldexp(cells.astype(float), -depth)
        hi = np.ldexp((cells + 1).astype(float), -depth)
        hit = _seg_box_hit(p, q, lo, hi, open_box)
        rel = cells[hit] - ilo
        out[rel[:, 0], rel[:, 1]] = True
    return out


def _segments_distance(points, segments):
    """Euclidean distance from each point to the union of segments."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    a = segments[:, 0, :]
    b = segments[:, 1, :]
    ab = b - a
    ll = np.einsum("ij,ij->i", ab, ab)
    ll_safe = np.where(ll > 0, ll, 1.0)
    out = np.empty(len(pts))
    step = max(1, _CHUNK // max(len(a), 1))
    for s in range(0, len(pts), step):
        P = pts[s:s + step, None, :]
        ap = P - a[None]
        t = np.clip(np.einsum("nij,ij->ni", ap, ab) / ll_safe, 0.0, 1.0)
        t = np.where(ll > 0, t, 0.0)
        diff = ap - t[..., None] * ab[None]
        out[s:s + step] = np.sqrt(np.min(np.einsum("nij,nij->ni", diff, diff), axis=1))
    return out


def _points_in_polygon(points, verts):
    """Even-odd rule; points exactly on an edge may go either way."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    x0, y0 = verts[:, 0], verts[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    inside = np.zeros(len(pts), dtype=bool)
    step = max(1, _CHUNK // max(len(verts), 1))
    for s in range(0, len(pts), step):
        px = pts[s:s + step, 0:1]
        py = pts[s:s + step, 1:2]
        crosses = (y0 > py) != (y1 > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xi = x0 + (py - y0) * (x1 - x0) / (y1 - y0)
        inside[s:s + step] = (np.count_nonzero(crosses & (px < xi), axis=1) % 2) == 1
    return inside


def _segments_intersect_properly(segs):
    """True if two non-adjacent segments of a closed loop intersect."""
    m = len(segs)
    if m < 4:
        return False
    a, b = segs[:, 0], segs[:, 1]
    # orientations below this are rounding noise on collinear points
    span = np.ptp(segs.reshape(-1, 2), axis=0).max()
    tol = 1e-12 * span * span

    def orient(p, q, r):
        o = ((q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1])
             - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0]))
        return np.where(np.abs(o) <= tol, 0.0, np.sign(o))

    for i in range(m):
        j = np.arange(i + 2, m)
        if i == 0:
            j = j[j != m - 1]
        if len(j) == 0:
            continue
        p, q = a[i], b[i]
        r, s = a[j], b[j]
        o1 = orient(p, q, r)
        o2 = orient(p, q, s)
        o3 = orient(r, s, np.broadcast_to(p, r.shape))
        o4 = orient(r, s, np.broadcast_to(q, r.shape))
        hit = (o1 * o2 <= 0) & (o3 * o4 <= 0)
        colinear = (o1 == 0) & (o2 == 0)
        if np.any(colinear):
            # collinear pairs only intersect if their projections overlap
            overl = np.all(np.maximum(np.minimum(p, q), np.minimum(r, s))
                           <= np.minimum(np.maximum(p, q), np.maximum(r, s)), axis=1)
            hit = np.where(colinear, overl, hit)
        if np.any(hit):
            return True
    return False


# -- shapes ------------------------------------------------------------------

class Shape:
    """Base class; concrete kinds implement ``bbox``, ``cell_mask`` and ``to_dict``."""

    kind = "shape"
    solid = True

    @property
    def ndim(self) -> int:
        raise NotImplementedError

    def bbox(self):
        raise NotImplementedError

    def cell_mask(self, depth, ilo, counts):
        raise UnsupportedShapeError(f"{self.kind} has no cube predicate")

    def distance(self, points):
        raise UnsupportedShapeError(f"{self.kind} has no exact distance function")

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __eq__(self, other):
        if not isinstance(other, Shape):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(json.dumps(self.to_dict(), sort_keys=True))


@dataclass(eq=False)
class Ball(Shape):
    """Closed ball; in the plane this is the disk."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float).ravel()
        self.radius = float(self.radius)
        if not self.radius > 0:
            raise PreconditionError(f"ball radius must be positive, got {self.radius}")

    @property
    def kind(self):
        return "disk" if self.ndim == 2 else "ball"

    @property
    def ndim(self):
        return self.center.size

    def bbox(self):
        return self.center - self.radius, self.center + self.radius

    def cell_mask(self, depth, ilo, counts):
        return _ball_cell_mask(self.center, self.radius, depth, ilo, counts, "open")

    def distance(self, points):
        p = np.asarray(points, dtype=float).reshape(-1, self.ndim)
        return np.maximum(np.linalg.norm(p - self.center, axis=1) - self.radius, 0.0)

    def to_dict(self):
        return {"kind": self.kind, "center": self.center.tolist(), "radius": self.radius}


def Disk(center, radius) -> Ball:
    return Ball(np.asarray(center, dtype=float)[:2], radius)


@dataclass(eq=False)
class BallUnion(Shape):
    """Union of closed balls, optionally intersected with a closed box ``clip``.

    ``radius`` is the common radius; ``radii`` overrides it per ball.
    """

    centers: np.ndarray
    radius: float | None = None
    radii: np.ndarray | None = None
    clip: tuple | None = None

    kind = "ball_union"

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=float)
        if c.ndim != 2 or len(c) == 0:
            raise PreconditionError("ball_union needs a non-empty (K, n) array of centres")
        self.centers = c
        if self.radii is None:
            if self.radius is None:
                raise PreconditionError("ball_union needs a radius or per-ball radii")
            self.radius = float(self.radius)
            self.radii = np.full(len(c), self.radius)
        else:
            self.radii = np.asarray(self.radii, dtype=float).ravel()
            if len(self.radii) != len(c):
                raise PreconditionError("ball_union radii length must match centres")
            if self.radius is not None:
                self.radius = float(self.radius)
        if not np.all(self.radii > 0):
            raise PreconditionError("ball_union radii must be positive")
        if self.clip is not None:
            self.clip = (np.asarray(self.clip[0], float), np.asarray(self.clip[1], float))

    @property
    def common_radius(self) -> float | None:
        r0 = self.radii[0]
        return float(r0) if np.all(self.radii == r0) else None

    @property
    def ndim(self):
        return self.centers.shape[1]

    def balls(self):
        return [Ball(c, r) for c, r in zip(self.centers, self.radii)]

    def bbox(self):
        lo = (self.centers - self.radii[:, None]).min(axis=0)
        hi = (self.centers + self.radii[:, None]).max(axis=0)
        if self.clip is not None:
            lo = np.maximum(lo, self.clip[0])
            hi = np.minimum(hi, self.clip[1])
        return lo, hi

    def cell_mask(self, depth, ilo, counts):
        out = np.zeros(tuple(int(c) for c in counts), dtype=bool)
        for c, r in zip(self.centers, self.radii):
            sub = _sub_box(ilo, counts, c - r, c + r, depth)
            if sub is None:
                continue
            slo, scounts = sub
            m = _ball_cell_mask(c, r, depth, slo, scounts, "open", self.clip)
            _paste(out, ilo, slo, m)
        return out

    def distance(self, points):
        if self.clip is not None:
            raise UnsupportedShapeError("clipped ball_union has no exact distance function")
        p = np.asarray(points, dtype=float).reshape(-1, self.ndim)
        d = np.full(len(p), np.inf)
        for c, r in zip(self.centers, self.radii):
            d = np.minimum(d, np.linalg.norm(p - c, axis=1) - r)
        return np.maximum(d, 0.0)

    def to_dict(self):
        d = {"kind": self.kind, "centers": self.centers.tolist()}
        if self.common_radius is not None and self.radius is not None:
            d["radius"] = self.radius
        else:
            d["radii"] = self.radii.tolist()
        if self.clip is not None:
            d["clip"] = [self.clip[0].tolist(), self.clip[1].tolist()]
        return d


@dataclass(eq=False)
class Polygon(Shape):
    """Closed simple polygon in the plane, stored counter-clockwise."""

    vertices: np.ndarray
    check_simple: bool = field(default=True, repr=False)

    kind = "polygon"

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise PreconditionError("polygon vertices must be an (m, 2) array")
        if len(v) > 1 and np.array_equal(v[0], v[-1]):
            v = v[:-1]
        if len(v) < 3:
            raise PreconditionError("polygon needs at least three vertices")
        if _signed_area(v) < 0:
            v = v[::-1].copy()
        if _signed_area(v) == 0:
            raise PreconditionError("polygon has zero area")
        self.vertices = v
        if self.check_simple and _segments_intersect_properly(self.segments):
            raise PreconditionError("polygon is not simple (edges cross)")

    @property
    def ndim(self):
        return 2

    @property
    def segments(self):
        v = self.vertices
        return np.stack([v, np.roll(v, -1, axis=0)], axis=1)

    def bbox(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def cell_mask(self, depth, ilo, counts):
        out = _segments_cell_mask(self.segments, depth, ilo, counts, open_box=True)
        # cells not crossed by an edge are inside iff their centre is
        x0, y0 = self.vertices[:, 0], self.vertices[:, 1]
        x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
        ix = np.arange(int(ilo[0]), int(ilo[0]) + int(counts[0]), dtype=np.int64)
        xc = np.ldexp((2 * ix + 1).astype(float), -depth - 1)
        for r in range(int(counts[1])):
            yc = math.ldexp(2 * (int(ilo[1]) + r) + 1, -depth - 1)
            crosses = (y0 > yc) != (y1 > yc)
            if not crosses.any():
                continue
            xs = np.sort(x0[crosses] + (yc - y0[crosses]) * (x1[crosses] - x0[crosses])
                         / (y1[crosses] - y0[crosses]))
            right = len(xs) - np.searchsorted(xs, xc, side="right")
            out[:, r] |= (right % 2) == 1
        return out

    def contains(self, points):
        return _points_in_polygon(points, self.vertices)

    def distance(self, points):
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        d = _segments_distance(p, self.segments)
        d[self.contains(p)] = 0.0
        return d

    @property
    def area(self) -> float:
        return _signed_area(self.vertices)

    @property
    def perimeter(self) -> float:
        s = self.segments
        return float(np.linalg.norm(s[:, 1] - s[:, 0], axis=1).sum())

    def to_dict(self):
        return {"kind": self.kind, "vertices": self.vertices.tolist()}


def _signed_area(v):
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


@dataclass(eq=False)
class Polyline(Shape):
    """Closed polygonal chain (not a loop) in the plane."""

    vertices: np.ndarray

    kind = "polyline"
    solid = False

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 2:
            raise PreconditionError("polyline needs an (m >= 2, 2) vertex array")
        self.vertices = v

    @property
    def ndim(self):
        return 2

    @property
    def segments(self):
        v = self.vertices
        return np.stack([v[:-1], v[1:]], axis=1)

    @property
    def length(self) -> float:
        s = self.segments
        return float(np.linalg.norm(s[:, 1] - s[:, 0], axis=1).sum())

    def bbox(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def cell_mask(self, depth, ilo, counts):
        return _segments_cell_mask(self.segments, depth, ilo, counts, open_box=False)

    def distance(self, points):
        return _segments_distance(points, self.segments)

    def to_dict(self):
        return {"kind": self.kind, "vertices": self.vertices.tolist()}


@dataclass(eq=False)
class PointCloud(Shape):
    """Finite point set, optionally carrying tangent angles and arc weights."""

    points: np.ndarray
    theta: np.ndarray | None = None
    weights: np.ndarray | None = None
    spacing: float | None = None

    kind = "point_cloud"
    solid = False

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        if p.ndim == 1:
            p = p.reshape(0, 2) if p.size == 0 else p.reshape(1, -1)
        self.points = p
        if self.theta is not None:
            self.theta = np.asarray(self.theta, dtype=float).ravel()
            if len(self.theta) != len(p):
                raise PreconditionError("theta length must match the number of points")
        if self.weights is not None:
            self.weights = np.asarray(self.weights, dtype=float).ravel()

    @property
    def ndim(self):
        return self.points.shape[1]

    def __len__(self):
        return len(self.points)

    def bbox(self):
        if len(self.points) == 0:
            raise PreconditionError("point_cloud is empty")
        return self.points.min(axis=0), self.points.max(axis=0)

    def cell_mask(self, depth, ilo, counts):
        out = np.zeros(tuple(int(c) for c in counts), dtype=bool)
        if len(self.points) == 0:
            return out
        scaled = np.ldexp(self.points, depth)
        base = np.floor(scaled).astype(np.int64)
        on_lattice = scaled == base
        ilo = np.asarray(ilo, dtype=np.int64)
        top = ilo + np.asarray(counts, dtype=np.int64)
        n = self.ndim
        for bits in range(1 << n):
            off = np.array([(bits >> j) & 1 for j in range(n)], dtype=np.int64)
            # offset 1 on axis j means the cube below a lattice coordinate
            ok = np.all(on_lattice | (off == 0), axis=1)
            cells = base[ok] - off
            keep = np.all((cells >= ilo) & (cells < top), axis=1)
            rel = cells[keep] - ilo
            out[tuple(rel.T)] = True
        return out

    def distance(self, points):
        if len(self.points) == 0:
            raise PreconditionError("point_cloud is empty")
        d, _ = cKDTree(self.points).query(np.asarray(points, dtype=float).reshape(-1, self.ndim))
        return np.asarray(d, dtype=float)

    def to_dict(self):
        d = {"kind": self.kind, "points": self.points.tolist()}
        if self.theta is not None:
            d["theta"] = self.theta.tolist()
        return d


@dataclass(eq=False)
class DenseUnitCube(Shape):
    """Stand-in for the rationals of the open unit cube.

    Dense in ``[0, 1]^n`` with Lebesgue measure zero; a cube meets it iff the
    cube overlaps the unit cube in positive volume.
    """

    dim: int = 2

    kind = "dense_unit_cube"

    @property
    def ndim(self):
        return int(self.dim)

    def bbox(self):
        return np.zeros(self.ndim), np.ones(self.ndim)

    def cell_mask(self, depth, ilo, counts):
        parts = []
        for a, c in zip(ilo, counts):
            m = np.arange(int(a), int(a) + int(c))
            parts.append((m >= 0) & (m < 2**depth))
        out = np.ones(tuple(int(c) for c in counts), dtype=bool)
        for j, v in enumerate(parts):
            shape = [1] * self.ndim
            shape[j] = len(v)
            out &= v.reshape(shape)
        return out

    def distance(self, points):
        p = np.asarray(points, dtype=float).reshape(-1, self.ndim)
        return np.linalg.norm(p - np.clip(p, 0.0, 1.0), axis=1)

    def to_dict(self):
        return {"kind": self.kind, "dim": self.ndim}


@dataclass(eq=False)
class Implicit(Shape):
    """Sub-level set ``{f <= 0}`` decided by a certified interval evaluator.

    ``bounds(lo, hi)`` takes ``(N, n)`` cell corner arrays and returns lower
    and upper bounds of ``f`` over each closed cell.  A cell is left out only
    when the lower bound is certified ``>= 0``; undecided cells are kept.
    """

    bounds: Callable
    lo: np.ndarray
    hi: np.ndarray
    family: str | None = None
    params: dict | None = None

    kind = "implicit"

    def __post_init__(self):
        self.lo = np.asarray(self.lo, dtype=float)
        self.hi = np.asarray(self.hi, dtype=float)

    @classmethod
    def ellipse(cls, center, semi_axes):
        c = np.asarray(center, dtype=float)
        ax = np.asarray(semi_axes, dtype=float)

        def bounds(lo, hi):
            u_lo = (lo - c) / ax
            u_hi = (hi - c) / ax
            sq_min = np.where((u_lo <= 0) & (u_hi >= 0), 0.0,
                              np.minimum(u_lo ** 2, u_hi ** 2))
            sq_max = np.maximum(u_lo ** 2, u_hi ** 2)
            return sq_min.sum(axis=1) - 1.0, sq_max.sum(axis=1) - 1.0

        return cls(bounds, c - ax, c + ax, "ellipse",
                   {"center": c.tolist(), "semi_axes": ax.tolist()})

    @classmethod
    def from_lipschitz(cls, f, lipschitz, lo, hi):
        """Bounds from a vectorised ``f`` and a Lipschitz constant."""

        def bounds(clo, chi):
            mid = 0.5 * (clo + chi)
            rad = 0.5 * np.linalg.norm(chi - clo, axis=1)
            v = np.asarray(f(mid), dtype=float)
            return v - lipschitz * rad, v + lipschitz * rad

        return cls(bounds, lo, hi)

    @property
    def ndim(self):
        return self.lo.size

    def bbox(self):
        return self.lo, self.hi

    def cell_mask(self, depth, ilo, counts):
        counts = tuple(int(c) for c in counts)
        idx = np.indices(counts).reshape(len(counts), -1).T + np.asarray(ilo, dtype=np.int64)
        lo = np.ldexp(idx.astype(float), -depth)
        hi = np.ldexp((idx + 1).astype(float), -depth)
        fmin, _ = self.bounds(lo, hi)
        return (np.asarray(fmin) < 0).reshape(counts)

    def to_dict(self):
        if self.family is None:
            raise UnsupportedShapeError("implicit shape built from a Python callable has no JSON form")
        return {"kind": self.kind, "family": self.family, **self.params}


@dataclass(eq=False)
class BoundaryOf(Shape):
    """The topological boundary of a disk/ball or polygon, as a thin set."""

    base: Shape

    kind = "boundary"
    solid = False

    def __post_init__(self):
        if not isinstance(self.base, (Ball, Polygon)):
            raise UnsupportedShapeError(f"boundary of {self.base.kind} is not supported")

    @property
    def ndim(self):
        return self.base.ndim

    def bbox(self):
        return self.base.bbox()

    def cell_mask(self, depth, ilo, counts):
        if isinstance(self.base, Ball):
            return _ball_cell_mask(self.base.center, self.base.radius, depth, ilo, counts, "sphere")
        return _segments_cell_mask(self.base.segments, depth, ilo, counts, open_box=False)

    def distance(self, points):
        if isinstance(self.base, Ball):
            p = np.asarray(points, dtype=float).reshape(-1, self.ndim)
            return np.abs(np.linalg.norm(p - self.base.center, axis=1) - self.base.radius)
        return _segments_distance(points, self.base.segments)

    def to_dict(self):
        return {"kind": self.kind, "of": self.base.to_dict()}


# -- module-level operations ---------------------------------------------------

def cube_intersects(shape: Shape, cube: DyadicCube) -> bool:
    """Whether ``cube`` belongs to the cover of ``shape`` (see module docstring)."""
    if shape.ndim != cube.ndim:
        raise PreconditionError(
            f"dimension mismatch: {shape.kind} lives in R^{shape.ndim}, cube in R^{cube.ndim}"
        )
    m = shape.cell_mask(cube.depth, np.asarray(cube.index, dtype=np.int64), (1,) * cube.ndim)
    return bool(m.ravel()[0])


def distance_to(shape: Shape, point) -> float:
    p = np.asarray(point, dtype=float).reshape(1, -1)
    return float(shape.distance(p)[0])


@dataclass(frozen=True)
class ExactMeasures:
    """Analytic reference values; ``None`` means unknown, ``math.inf`` infinite."""

    volume: float | None
    boundary_measure: float | None
    reach_true: float | None


def _disk_union_area_perimeter(centers, radii):
    """Exact area and perimeter of a union of disks by integrating exposed arcs."""
    pairs = {(float(c[0]), float(c[1]), float(r)) for c, r in zip(centers, radii)}
    circles = sorted(pairs)
    area2 = 0.0
    perim = 0.0
    for i, (xi, yi, ri) in enumerate(circles):
        covered = []
        swallowed = False
        for j, (xj, yj, rj) in enumerate(circles):
            if i == j:
                continue
            d = math.hypot(xj - xi, yj - yi)
            if d >= ri + rj:
                continue
            if d + ri <= rj:
                swallowed = True
                break
            if d + rj <= ri:
                continue
            phi = math.atan2(yj - yi, xj - xi)
            cosa = (ri * ri + d * d - rj * rj) / (2 * ri * d)
            alpha = math.acos(max(-1.0, min(1.0, cosa)))
            a, b = phi - alpha, phi + alpha
            a %= 2 * math.pi
            b = a + 2 * alpha
            if b > 2 * math.pi:
                covered.append((a, 2 * math.pi))
                covered.append((0.0, b - 2 * math.pi))
            else:
                covered.append((a, b))
        if swallowed:
            continue
        covered.sort()
        merged = []
        for a, b in covered:
            if merged and a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        exposed = []
        t = 0.0
        for a, b in merged:
            if a > t:
                exposed.append((t, a))
            t = max(t, b)
        if t < 2 * math.pi:
            exposed.append((t, 2 * math.pi))
        for a, b in exposed:
            area2 += (ri * ri * (b - a) + xi * ri * (math.sin(b) - math.sin(a))
                      - yi * ri * (math.cos(b) - math.cos(a)))
            perim += ri * (b - a)
    return 0.5 * area2, perim


def _ball_union_reach(bu: BallUnion):
    if bu.common_radius is None:
        return None
    r = bu.common_radius
    c = np.unique(bu.centers, axis=0)
    if len(c) == 1:
        return r
    d = np.linalg.norm(c[:, None] - c[None], axis=2)
    d = d[np.triu_indices(len(c), 1)]
    if np.any(d <= 2 * r):
        return 0.0
    return float(min(r, (d.min() - 2 * r) / 2))


def exact_measures(shape: Shape) -> ExactMeasures:
    """Analytic volume, boundary measure and reach of the boundary, when known."""
    if isinstance(shape, Ball):
        n, r = shape.ndim, shape.radius
        return ExactMeasures(unit_ball_volume(n) * r**n, n * unit_ball_volume(n) * r ** (n - 1), r)
    if isinstance(shape, Polygon):
        # a polygon boundary has corners, hence zero reach
        return ExactMeasures(shape.area, shape.perimeter, 0.0)
    if isinstance(shape, Polyline):
        d = np.diff(shape.vertices, axis=0)
        d = d[np.any(d != 0, axis=1)]
        straight = len(d) <= 1 or (np.all(d[:, 0] * d[0, 1] - d[:, 1] * d[0, 0] == 0)
                                   and np.all(d @ d[0] > 0))
        return ExactMeasures(0.0, shape.length, math.inf if straight else 0.0)
    if isinstance(shape, DenseUnitCube):
        return ExactMeasures(0.0, None, None)
    if isinstance(shape, PointCloud):
        if len(shape.points) < 2:
            return ExactMeasures(0.0, None, math.inf)
        d, _ = cKDTree(shape.points).query(shape.points, k=2)
        return ExactMeasures(0.0, None, float(d[:, 1].min()) / 2)
    if isinstance(shape, BallUnion):
        if shape.clip is not None:
            return ExactMeasures(None, None, None)
        reach = _ball_union_reach(shape)
        if shape.ndim == 2:
            area, perim = _disk_union_area_perimeter(shape.centers, shape.radii)
            return ExactMeasures(area, perim, reach)
        if reach is not None and reach > 0 or len(np.unique(shape.centers, axis=0)) == 1:
            n = shape.ndim
            c = np.unique(np.column_stack([shape.centers, shape.radii]), axis=0)
            vol = float(sum(unit_ball_volume(n) * r**n for r in c[:, -1]))
            bnd = float(sum(n * unit_ball_volume(n) * r ** (n - 1) for r in c[:, -1]))
            return ExactMeasures(vol, bnd, reach)
        return ExactMeasures(None, None, reach)
    if isinstance(shape, BoundaryOf):
        inner = exact_measures(shape.base)
        return ExactMeasures(0.0, inner.boundary_measure, inner.reach_true)
    return ExactMeasures(None, None, None)


def _sample_circle(center, r, spacing):
    """Power-of-two equiangular samples starting at angle 0; halving the
    spacing yields a superset."""
    n = max(4, 1 << int(math.ceil(math.log2(2 * math.pi * r / spacing))))
    t = 2 * math.pi * np.arange(n) / n
    pts = np.column_stack([center[0] + r * np.cos(t), center[1] + r * np.sin(t)])
    theta = np.mod(t + math.pi / 2, math.pi)
    return pts, theta, np.full(n, 2 * math.pi * r / n)


def _sample_segments(segs, spacing):
    pts, th, w = [], [], []
    for p, q in segs:
        L = float(np.hypot(*(q - p)))
        if L == 0:
            continue
        k = max(1, int(math.ceil(L / spacing)))
        t = (np.arange(k) + 0.5) / k
        pts.append(p + t[:, None] * (q - p))
        th.append(np.full(k, math.atan2(q[1] - p[1], q[0] - p[0]) % math.pi))
        w.append(np.full(k, L / k))
    if not pts:
        return np.zeros((0, 2)), np.zeros(0), np.zeros(0)
    return np.concatenate(pts), np.concatenate(th), np.concatenate(w)


def sample_boundary(shape: Shape, spacing: float) -> PointCloud:
    """Points on the boundary curve with exact tangent angles in [0, pi).

    Consecutive samples along each smooth piece are at most ``spacing``
    apart; polygon and polyline vertices are never sampled.
    """
    if not spacing > 0:
        raise PreconditionError(f"spacing must be positive, got {spacing}")
    if isinstance(shape, BoundaryOf):
        shape = shape.base
    if isinstance(shape, Ball) and shape.ndim == 2:
        pts, th, w = _sample_circle(shape.center, shape.radius, spacing)
    elif isinstance(shape, Polygon):
        pts, th, w = _sample_segments(shape.segments, spacing)
    elif isinstance(shape, Polyline):
        pts, th, w = _sample_segments(shape.segments, spacing)
    elif isinstance(shape, BallUnion) and shape.ndim == 2 and shape.clip is None:
        parts = []
        for i, (c, r) in enumerate(zip(shape.centers, shape.radii)):
            p, t, ww = _sample_circle(c, r, spacing)
            keep = np.ones(len(p), dtype=bool)
            for j, (c2, r2) in enumerate(zip(shape.centers, shape.radii)):
                if j != i and not (np.array_equal(c2, c) and r2 == r):
                    keep &= np.linalg.norm(p - c2, axis=1) >= r2
                elif j < i and np.array_equal(c2, c) and r2 == r:
                    keep[:] = False
            parts.append((p[keep], t[keep], ww[keep]))
        pts = np.concatenate([p for p, _, _ in parts])
        th = np.concatenate([t for _, t, _ in parts])
        w = np.concatenate([ww for _, _, ww in parts])
    else:
        raise UnsupportedShapeError(f"sample_boundary does not support {shape.kind}")
    return PointCloud(pts, th, w, float(spacing))


# -- JSON / CSV ingestion ------------------------------------------------------

def _need(d, key, where):
    if key not in d:
        raise PreconditionError(f"shape JSON ({where}): missing field '{key}'")
    return d[key]


def shape_from_dict(d: dict) -> Shape:
    if not isinstance(d, dict):
        raise PreconditionError("shape JSON must be an object")
    kind = _need(d, "kind", "top level")
    try:
        if kind in ("disk", "ball"):
            return Ball(_need(d, "center", kind), _need(d, "radius", kind))
        if kind == "ball_union":
            return BallUnion(_need(d, "centers", kind), d.get("radius"), d.get("radii"), d.get("clip"))
        if kind == "polygon":
            return Polygon(_need(d, "vertices", kind))
        if kind == "polyline":
            return Polyline(_need(d, "vertices", kind))
        if kind == "dense_unit_cube":
            return DenseUnitCube(int(d.get("dim", 2)))
        if kind == "point_cloud":
            return PointCloud(_need(d, "points", kind), d.get("theta"))
        if kind == "implicit":
            fam = _need(d, "family", kind)
            if fam != "ellipse":
                raise PreconditionError(f"shape JSON (implicit): unknown family '{fam}'")
            return Implicit.ellipse(_need(d, "center", kind), _need(d, "semi_axes", kind))
        if kind == "boundary":
            return BoundaryOf(shape_from_dict(_need(d, "of", kind)))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, PreconditionError):
            raise
        raise PreconditionError(f"shape JSON ({kind}): {exc}") from exc
    raise PreconditionError(f"shape JSON: unknown kind '{kind}'")


def load_shape(path) -> Shape:
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise PreconditionError(f"shape JSON {path}: {exc}") from exc
    return shape_from_dict(d)


def dump_shape(shape: Shape, path) -> None:
    with open(path, "w") as fh:
        json.dump(shape.to_dict(), fh, indent=1)
        fh.write("\n")


def read_point_cloud_csv(path) -> PointCloud:
    """Read ``x,y[,theta]`` rows (a header line is optional)."""
    rows = []
    with open(path) as fh:
        for rec in csv.reader(fh):
            if not rec:
                continue
            try:
                rows.append([float(v) for v in rec])
            except ValueError:
                if rows:
                    raise PreconditionError(f"{path}: non-numeric row {rec}")
    if not rows:
        return PointCloud(np.zeros((0, 2)))
    a = np.array(rows)
    if a.shape[1] == 3:
        return PointCloud(a[:, :2], a[:, 2])
    return PointCloud(a)
