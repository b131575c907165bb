"""Dyadic cubes, cubical covers and the boundary of a cover.

A depth-``d`` dyadic cube in R^n is the closed box

    prod_j [m_j 2^-d, (m_j + 1) 2^-d]

for an integer index vector ``m``.  Corner coordinates are built with
``math.ldexp`` so they are exact binary floats for every depth up to
:data:`MAX_DEPTH`.

A :class:`CubicalCover` keeps its cubes as a boolean occupancy array over an
index box plus the integer offset of that box.  This is the same set as a
sorted index list (``cover.indices`` materialises it in lexicographic order)
but boundary extraction becomes a handful of array shifts, which matters at
depth 12 where a unit disk is covered by ~5e7 cubes.
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import PreconditionError

MAX_DEPTH = 52
#: cells in a cover's index box; above this build_cover refuses to allocate
MAX_CELLS = 2**28


def _check_depth(depth):
    if int(depth) != depth or depth < 0:
        raise PreconditionError(f"depth must be a non-negative integer, got {depth!r}")
    if depth > MAX_DEPTH:
        raise PreconditionError(
            f"depth {depth} exceeds {MAX_DEPTH}; corner coordinates would no longer be exact"
        )
    return int(depth)


@dataclass(frozen=True)
class DyadicCube:
    """Closed cube ``prod [m_j 2^-d, (m_j+1) 2^-d]``."""

    depth: int
    index: tuple

    def __post_init__(self):
        object.__setattr__(self, "depth", _check_depth(self.depth))
        object.__setattr__(self, "index", tuple(int(m) for m in self.index))

    @property
    def ndim(self) -> int:
        return len(self.index)

    @property
    def side(self) -> float:
        return math.ldexp(1.0, -self.depth)

    @property
    def side_exact(self) -> Fraction:
        return Fraction(1, 2**self.depth)

    @property
    def lower(self) -> np.ndarray:
        return np.array([math.ldexp(m, -self.depth) for m in self.index])

    @property
    def upper(self) -> np.ndarray:
        return np.array([math.ldexp(m + 1, -self.depth) for m in self.index])

    @property
    def center(self) -> np.ndarray:
        return np.array([math.ldexp(2 * m + 1, -self.depth - 1) for m in self.index])

    @property
    def volume(self) -> float:
        return math.ldexp(1.0, -self.depth * self.ndim)

    def contains(self, point) -> bool:
        p = np.asarray(point, dtype=float)
        return bool(np.all(self.lower <= p) and np.all(p <= self.upper))

    def parent(self) -> "DyadicCube":
        if self.depth == 0:
            raise PreconditionError("a depth-0 cube has no dyadic parent")
        return DyadicCube(self.depth - 1, tuple(m >> 1 for m in self.index))

    def children(self) -> list:
        offsets = itertools.product((0, 1), repeat=self.ndim)
        return [
            DyadicCube(self.depth + 1, tuple(2 * m + o for m, o in zip(self.index, off)))
            for off in offsets
        ]


def cube_containing(point, depth: int) -> DyadicCube:
    """Return the depth-``depth`` cube with index ``floor(point * 2**depth)``.

    A point on a lattice hyperplane lies in every abutting closed cube; this
    lookup returns only the representative with the largest index.  Use
    ``cube_intersects`` when membership in all of them matters.
    """
    depth = _check_depth(depth)
    p = np.asarray(point, dtype=float).ravel()
    if not np.all(np.isfinite(p)):
        raise PreconditionError(f"point has non-finite coordinates: {p}")
    return DyadicCube(depth, tuple(int(math.floor(math.ldexp(x, depth))) for x in p))


class Box(NamedTuple):
    lo: np.ndarray
    hi: np.ndarray

    @property
    def side(self) -> float:
        return float(self.hi[0] - self.lo[0])


def concentric_3c(cube: DyadicCube) -> Box:
    """The closed cube with the same centre as ``cube`` and three times its side."""
    lo = np.array([math.ldexp(m - 1, -cube.depth) for m in cube.index])
    hi = np.array([math.ldexp(m + 2, -cube.depth) for m in cube.index])
    return Box(lo, hi)


@dataclass(frozen=True)
class Tiling:
    """One of the 3^n tilings of R^n by 3C blocks on the depth-``d`` lattice.

    A block is the 3x...x3 group of depth-``d`` cells whose lowest cell index
    ``b`` satisfies ``b = shift (mod 3)`` componentwise.
    """

    depth: int
    shift: tuple

    def block_base(self, index) -> tuple:
        return tuple(m - ((m - s) % 3) for m, s in zip(index, self.shift))

    def is_central(self, index) -> bool:
        return all((m - 1 - s) % 3 == 0 for m, s in zip(index, self.shift))


def tilings_3n(depth: int, ambient_dim: int) -> list:
    depth = _check_depth(depth)
    return [Tiling(depth, s) for s in itertools.product(range(3), repeat=ambient_dim)]


def tiling_of(index) -> int:
    """Position in ``tilings_3n`` of the tiling in which cell ``index`` is a block centre."""
    pos = 0
    for m in index:
        pos = 3 * pos + (int(m) - 1) % 3
    return pos


class CubicalCover:
    """The set C(E, d) of depth-``d`` dyadic cubes meeting a set E."""

    def __init__(self, depth: int, offset, mask: np.ndarray):
        self.depth = _check_depth(depth)
        self.offset = np.asarray(offset, dtype=np.int64).ravel()
        self.mask = np.asarray(mask, dtype=bool)
        if self.mask.ndim != self.offset.size:
            raise PreconditionError("offset length must equal the mask dimension")
        self._indices = None

    @classmethod
    def from_indices(cls, depth: int, indices, ndim: int | None = None) -> "CubicalCover":
        idx = np.asarray(indices, dtype=np.int64)
        if idx.size == 0:
            n = ndim if ndim is not None else (idx.shape[1] if idx.ndim == 2 else 2)
            return cls(depth, np.zeros(n, dtype=np.int64), np.zeros((0,) * n, dtype=bool))
        idx = idx.reshape(len(idx), -1)
        lo = idx.min(axis=0)
        shape = tuple(idx.max(axis=0) - lo + 1)
        mask = np.zeros(shape, dtype=bool)
        mask[tuple((idx - lo).T)] = True
        return cls(depth, lo, mask)

    @property
    def ndim(self) -> int:
        return self.offset.size

    @property
    def side(self) -> float:
        return math.ldexp(1.0, -self.depth)

    def __len__(self) -> int:
        return int(np.count_nonzero(self.mask))

    @property
    def indices(self) -> np.ndarray:
        """Cube indices as an ``(N, n)`` int64 array in lexicographic order."""
        if self._indices is None:
            self._indices = np.argwhere(self.mask).astype(np.int64) + self.offset
        return self._indices

    def __iter__(self) -> Iterator[DyadicCube]:
        for row in self.indices:
            yield DyadicCube(self.depth, tuple(row))

    def __contains__(self, item) -> bool:
        if isinstance(item, DyadicCube):
            if item.depth != self.depth:
                return False
            item = item.index
        rel = np.asarray(item, dtype=np.int64) - self.offset
        if np.any(rel < 0) or np.any(rel >= self.mask.shape):
            return False
        return bool(self.mask[tuple(rel)])

    def contains_indices(self, indices) -> np.ndarray:
        """Vectorised membership for an ``(N, n)`` array of indices."""
        rel = np.asarray(indices, dtype=np.int64) - self.offset
        ok = np.all((rel >= 0) & (rel < np.array(self.mask.shape)), axis=1)
        out = np.zeros(len(rel), dtype=bool)
        out[ok] = self.mask[tuple(rel[ok].T)]
        return out

    def cropped(self) -> "CubicalCover":
        if not self.mask.any():
            return CubicalCover(self.depth, self.offset, np.zeros((0,) * self.ndim, dtype=bool))
        nz = [np.flatnonzero(self.mask.any(axis=tuple(j for j in range(self.ndim) if j != a)))
              for a in range(self.ndim)]
        sl = tuple(slice(z[0], z[-1] + 1) for z in nz)
        lo = self.offset + np.array([z[0] for z in nz])
        return CubicalCover(self.depth, lo, self.mask[sl])

    def __eq__(self, other):
        if not isinstance(other, CubicalCover):
            return NotImplemented
        return (self.depth == other.depth and self.ndim == other.ndim
                and np.array_equal(self.indices, other.indices))

    def __repr__(self):
        return f"CubicalCover(depth={self.depth}, ndim={self.ndim}, cubes={len(self)})"


def build_cover(shape, depth: int, max_cells: int = MAX_CELLS) -> CubicalCover:
    """Construct C(E, d) for a bounded shape.

    Candidates are the depth-``d`` cells of the shape's bounding box grown by
    one cell; the shape's own vectorised predicate decides each of them.
    """
    depth = _check_depth(depth)
    if getattr(shape, "kind", None) == "point_cloud" and len(shape) == 0:
        # the empty set meets no cube
        return CubicalCover.from_indices(depth, np.zeros((0, shape.ndim), np.int64), shape.ndim)
    lo, hi = shape.bbox()
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise PreconditionError(f"{shape.kind} shape is unbounded; covers need bounded sets")
    ilo = np.floor(np.ldexp(lo, depth)).astype(np.int64) - 1
    ihi = np.floor(np.ldexp(hi, depth)).astype(np.int64) + 1
    counts = ihi - ilo + 1
    ncells = float(np.prod(counts.astype(float)))
    if ncells > max_cells:
        raise PreconditionError(
            f"{shape.kind} cover at depth {depth} needs {ncells:.3g} candidate cells "
            f"(limit {max_cells})"
        )
    mask = shape.cell_mask(depth, ilo, tuple(int(c) for c in counts))
    return CubicalCover(depth, ilo, mask).cropped()


def cover_volume_exact(cover: CubicalCover) -> Fraction:
    return Fraction(len(cover), 2 ** (cover.ndim * cover.depth))


def cover_volume(cover: CubicalCover) -> float:
    """``|cubes| * 2^(-n d)``; exact in binary floating point below 2^53 cubes."""
    return math.ldexp(float(len(cover)), -cover.ndim * cover.depth)


@dataclass(frozen=True)
class CubicalBoundary:
    """Exposed faces of a cover.

    Face ``k`` is the face of cube ``cube_index[k]`` orthogonal to axis
    ``axis[k]``, on its low (``side == 0``) or high (``side == 1``) end.  The
    lattice coordinate of the face along ``axis`` is ``cube_index + side``.
    """

    depth: int
    ndim: int
    cube_index: np.ndarray
    axis: np.ndarray
    side: np.ndarray

    def __len__(self) -> int:
        return len(self.axis)

    @property
    def base_index(self) -> np.ndarray:
        base = self.cube_index.copy()
        base[np.arange(len(base)), self.axis] += self.side
        return base


def cover_boundary(cover: CubicalCover) -> CubicalBoundary:
    """Faces of cover cubes whose neighbour across the face is not in the cover.

    Two cubes meeting only at a corner both keep all their faces there, so a
    pinch point contributes its faces to the boundary.
    """
    n = cover.ndim
    padded = np.pad(cover.mask, 1)
    core = tuple([slice(1, -1)] * n)
    idx_parts, axis_parts, side_parts = [], [], []
    for a in range(n):
        for side, sl in ((0, slice(0, -2)), (1, slice(2, None))):
            nb = list(core)
            nb[a] = sl
            exposed = padded[core] & ~padded[tuple(nb)]
            idx = np.argwhere(exposed).astype(np.int64) + cover.offset
            idx_parts.append(idx)
            axis_parts.append(np.full(len(idx), a, dtype=np.int64))
            side_parts.append(np.full(len(idx), side, dtype=np.int64))
    idx = np.concatenate(idx_parts) if idx_parts else np.zeros((0, n), dtype=np.int64)
    axis = np.concatenate(axis_parts)
    side = np.concatenate(side_parts)
    order = np.lexsort((side, axis) + tuple(idx[:, j] for j in reversed(range(n))))
    return CubicalBoundary(cover.depth, n, idx[order], axis[order], side[order])


def boundary_area(boundary: CubicalBoundary) -> float:
    return math.ldexp(float(len(boundary)), -(boundary.ndim - 1) * boundary.depth)


# -- serialisation -----------------------------------------------------------

def write_cover_csv(cover: CubicalCover, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["d"] + [f"m{j + 1}" for j in range(cover.ndim)])
    for row in cover.indices:
        w.writerow([cover.depth] + [int(m) for m in row])


def read_cover_csv(fh) -> CubicalCover:
    rows = list(csv.reader(fh))
    header = rows[0]
    n = len(header) - 1
    body = [[int(v) for v in r] for r in rows[1:] if r]
    if not body:
        return CubicalCover.from_indices(0, np.zeros((0, n)), ndim=n)
    depths = {r[0] for r in body}
    if len(depths) != 1:
        raise PreconditionError(f"cover CSV mixes depths {sorted(depths)}")
    return CubicalCover.from_indices(depths.pop(), [r[1:] for r in body], ndim=n)


def write_boundary_csv(boundary: CubicalBoundary, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["d"] + [f"base{j + 1}" for j in range(boundary.ndim)] + ["axis", "side"])
    for base, a, s in zip(boundary.base_index, boundary.axis, boundary.side):
        w.writerow([boundary.depth] + [int(m) for m in base] + [int(a), int(s)])


def lattice_box_indices(depth: int, lo: Sequence[float], hi: Sequence[float]) -> np.ndarray:
    """All depth-``d`` cell indices whose cells lie inside the box ``[lo, hi]``."""
    ilo = np.ceil(np.ldexp(np.asarray(lo, float), depth)).astype(np.int64)
    ihi = np.floor(np.ldexp(np.asarray(hi, float), depth)).astype(np.int64) - 1
    axes = [np.arange(a, b + 1) for a, b in zip(ilo, ihi)]
    grid = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grid], axis=1)
