"""Parametric shape families used by the experiments and the CLI."""
from __future__ import annotations

import math

import numpy as np

from .dyadic import build_cover
from .errors import PreconditionError
from .shapes import BallUnion, Disk, Polygon, Polyline, Shape

FAMILIES = ("disk", "square", "rotated-square", "ball-union-random", "koch",
            "sawtooth", "eps-rational-balls")


def koch_vertices(level: int, sign: float = 1.0) -> np.ndarray:
    """Koch curve from (0,0) to (1,0); ``level`` refinements give 4**level segments.

    ``sign=+1`` puts the bumps on the left of the direction of travel.
    """
    if level < 0:
        raise PreconditionError("koch level must be non-negative")
    pts = np.array([[0.0, 0.0], [1.0, 0.0]])
    c, s = 0.5, sign * math.sqrt(3) / 2
    rot = np.array([[c, -s], [s, c]])
    for _ in range(level):
        a, b = pts[:-1], pts[1:]
        e = (b - a) / 3
        p1 = a + e
        p3 = a + 2 * e
        p2 = p1 + e @ rot.T
        new = np.stack([a, p1, p2, p3], axis=1).reshape(-1, 2)
        pts = np.vstack([new, pts[-1:]])
    return pts


def koch_snowflake(level: int) -> np.ndarray:
    """Closed snowflake as a counter-clockwise vertex loop (bumps outward)."""
    tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]])
    base = koch_vertices(level, sign=-1.0)[:-1]
    loops = []
    for i in range(3):
        a, b = tri[i], tri[(i + 1) % 3]
        e = b - a
        rot = np.array([[e[0], -e[1]], [e[1], e[0]]])
        loops.append(a + base @ rot.T)
    return np.vstack(loops)


def sawtooth_vertices(teeth: int, x0=0.0, x1=1.0) -> np.ndarray:
    """Zig-zag with slopes +-1 between (x0,0) and (x1,0); tooth height (x1-x0)/(2 teeth)."""
    if teeth < 1:
        raise PreconditionError("sawtooth needs at least one tooth")
    x = np.linspace(x0, x1, 2 * teeth + 1)
    y = np.zeros_like(x)
    y[1::2] = (x1 - x0) / (2 * teeth)
    return np.column_stack([x, y])


def dyadic_rationals(count: int) -> np.ndarray:
    """First ``count`` points of an enumeration of the dyadic rationals in [0,1]^2.

    Points are listed by the depth at which they first appear, then
    lexicographically, so the first (2^j+1)^2 points are exactly the
    depth-j lattice.
    """
    out = []
    seen = set()
    j = 0
    while len(out) < count:
        n = 1 << j
        for a in range(n + 1):
            for b in range(n + 1):
                key = (a << (60 - j), b << (60 - j))
                if key not in seen:
                    seen.add(key)
                    out.append((a / n, b / n))
                    if len(out) == count:
                        break
            if len(out) == count:
                break
        j += 1
    return np.array(out, dtype=float)


def eps_rational_balls(K: int, eps: float) -> BallUnion:
    """Balls of radius eps/2^i around the first K dyadic rationals, clipped to [0,1]^2."""
    if K < 1 or not eps > 0:
        raise PreconditionError("eps-rational-balls needs K >= 1 and eps > 0")
    centers = dyadic_rationals(K)
    radii = eps / np.ldexp(1.0, np.arange(1, K + 1))
    return BallUnion(centers, radii=radii, clip=([0.0, 0.0], [1.0, 1.0]))


def deepest_full_cover(shape: Shape, max_depth: int = 12) -> int:
    """Largest d <= max_depth such that every depth-d cube of [0,1]^2 is covered
    (checked for all depths up to it), or -1."""
    best = -1
    for d in range(max_depth + 1):
        cov = build_cover(shape, d)
        inside = cov.indices
        inside = inside[np.all((inside >= 0) & (inside < (1 << d)), axis=1)]
        if len(inside) != 4**d:
            break
        best = d
    return best


def generate_shape(family: str, seed: int = 0, **params) -> Shape:
    """Build a shape from a named family; randomness only through ``seed``."""
    if family == "disk":
        return Disk(params.get("center", (0.0, 0.0)), float(params.get("radius", 1.0)))
    if family == "square":
        s = float(params.get("side", 1.0))
        x, y = params.get("origin", (0.0, 0.0))
        return Polygon([[x, y], [x + s, y], [x + s, y + s], [x, y + s]])
    if family == "rotated-square":
        s = float(params.get("half_diagonal", 0.5))
        cx, cy = params.get("center", (0.5, 0.5))
        return Polygon([[cx, cy - s], [cx + s, cy], [cx, cy + s], [cx - s, cy]])
    if family == "ball-union-random":
        rng = np.random.default_rng(seed)
        k = int(params.get("count", 5))
        dim = int(params.get("dim", 2))
        box = float(params.get("box", 4.0))
        r = float(params.get("radius", 1.0))
        return BallUnion(rng.uniform(0.0, box, size=(k, dim)), r)
    if family == "koch":
        level = int(params.get("level", 3))
        if params.get("closed", False):
            return Polygon(koch_snowflake(level), check_simple=level <= 4)
        return Polyline(koch_vertices(level))
    if family == "sawtooth":
        return Polyline(sawtooth_vertices(int(params.get("teeth", 8))))
    if family == "eps-rational-balls":
        return eps_rational_balls(int(params.get("K", 100)), float(params.get("eps", 0.01)))
    raise PreconditionError(f"unknown shape family '{family}'; expected one of {', '.join(FAMILIES)}")
