"""Discrete multiscale flat norm of boundary curves of binary regions in the plane.

A region E is a set of cells of side ``h = 2^-g``; its boundary chain T
consists of the lattice edges separating E from its complement.  For a
2-chain S made of cells (with signs, S = E - F for a cell set F) the
residual ``T - dS`` is the boundary of F, so

    F_lambda(T) = min_F  h * per(F) + lambda * h^2 * |E symmetric-difference F|

where ``per`` counts lattice edges.  Because E is binary this L1-TV problem
has a binary minimiser, and the binary problem is a graph cut solved
exactly by max-flow.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse
from scipy.sparse.csgraph import breadth_first_order, maximum_flow

from .dyadic import DyadicCube
from .errors import PreconditionError
from .shapes import Shape

_INT32_MAX = 2**31 - 1


@dataclass
class BinaryRegion:
    """Filled cells ``offset + (i, j)`` for every ``mask[i, j]`` at grid depth ``g``."""

    depth: int
    offset: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        self.depth = int(self.depth)
        self.offset = np.asarray(self.offset, dtype=np.int64).reshape(2)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.mask.ndim != 2:
            raise PreconditionError("region mask must be 2-dimensional")

    @property
    def side(self) -> float:
        return math.ldexp(1.0, -self.depth)

    @property
    def cells(self) -> np.ndarray:
        return np.argwhere(self.mask) + self.offset

    def __len__(self):
        return int(self.mask.sum())

    @property
    def area(self) -> float:
        return len(self) * self.side**2

    @classmethod
    def from_cells(cls, depth, cells):
        cells = np.asarray(cells, dtype=np.int64).reshape(-1, 2)
        if len(cells) == 0:
            return cls(depth, (0, 0), np.zeros((0, 0), bool))
        lo = cells.min(axis=0)
        hi = cells.max(axis=0)
        mask = np.zeros(tuple(hi - lo + 1), bool)
        mask[tuple((cells - lo).T)] = True
        return cls(depth, lo, mask)

    @classmethod
    def from_shape(cls, shape: Shape, depth: int):
        """Digitise a solid planar shape: a cell is filled when its centre lies in the shape."""
        if shape.ndim != 2:
            raise PreconditionError("regions are planar")
        lo, hi = shape.bbox()
        ilo = np.floor(np.ldexp(np.asarray(lo, float), depth)).astype(np.int64) - 1
        ihi = np.floor(np.ldexp(np.asarray(hi, float), depth)).astype(np.int64) + 1
        ii, jj = np.meshgrid(np.arange(ilo[0], ihi[0] + 1), np.arange(ilo[1], ihi[1] + 1), indexing="ij")
        centers = np.ldexp(np.column_stack([2 * ii.ravel() + 1, 2 * jj.ravel() + 1]).astype(float), -depth - 1)
        mask = (shape.distance(centers) == 0).reshape(ii.shape)
        return cls(depth, ilo, mask).cropped()

    def cropped(self):
        if not self.mask.any():
            return BinaryRegion(self.depth, (0, 0), np.zeros((0, 0), bool))
        nz = np.argwhere(self.mask)
        lo, hi = nz.min(axis=0), nz.max(axis=0) + 1
        return BinaryRegion(self.depth, self.offset + lo, self.mask[lo[0]:hi[0], lo[1]:hi[1]])

    def window(self, lo, shape) -> np.ndarray:
        """The mask restricted to cells ``lo + [0, shape)`` (zeros outside the region)."""
        lo = np.asarray(lo, np.int64)
        out = np.zeros(tuple(int(s) for s in shape), bool)
        if self.mask.size == 0:
            return out
        a = np.maximum(lo, self.offset)
        b = np.minimum(lo + np.asarray(shape), self.offset + np.array(self.mask.shape))
        if np.any(b <= a):
            return out
        out[a[0] - lo[0]:b[0] - lo[0], a[1] - lo[1]:b[1] - lo[1]] = \
            self.mask[a[0] - self.offset[0]:b[0] - self.offset[0], a[1] - self.offset[1]:b[1] - self.offset[1]]
        return out

    # -- boundary chain -----------------------------------------------------

    def boundary_edges(self) -> list:
        """Oriented boundary edges ``((x0, y0), (x1, y1))`` in lattice units, region on the left."""
        return _oriented_edges(self.mask, self.offset)

    def boundary_edge_count(self) -> int:
        return perimeter_edges(self.mask)

    @property
    def boundary_mass(self) -> float:
        return self.boundary_edge_count() * self.side

    def vertex_degrees(self) -> dict:
        deg = {}
        for a, b in self.boundary_edges():
            deg[a] = deg.get(a, 0) + 1
            deg[b] = deg.get(b, 0) + 1
        return deg

    # -- I/O ----------------------------------------------------------------

    def to_pbm(self) -> str:
        """Plain PBM (P1); the first row is the top (largest y) row of cells."""
        m = self.mask
        lines = ["P1", f"# depth {self.depth} offset {self.offset[0]} {self.offset[1]}",
                 f"{m.shape[0]} {m.shape[1]}"]
        for j in range(m.shape[1] - 1, -1, -1):
            lines.append(" ".join("1" if v else "0" for v in m[:, j]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_pbm(cls, text: str, depth: int | None = None, offset=None):
        tokens, comments = [], []
        for line in text.splitlines():
            body, _, comment = line.partition("#")
            if comment:
                comments.append(comment.split())
            tokens.extend(body.split())
        if not tokens or tokens[0] != "P1":
            raise PreconditionError("region PBM: expected plain 'P1' header")
        for c in comments:
            if len(c) >= 5 and c[0] == "depth" and c[2] == "offset":
                depth = int(c[1]) if depth is None else depth
                offset = (int(c[3]), int(c[4])) if offset is None else offset
        if depth is None:
            raise PreconditionError("region PBM: grid depth not given")
        try:
            w, h = int(tokens[1]), int(tokens[2])
        except (IndexError, ValueError) as exc:
            raise PreconditionError("region PBM: bad width/height") from exc
        bits = "".join(tokens[3:])
        if len(bits) != w * h or set(bits) - {"0", "1"}:
            raise PreconditionError(f"region PBM: expected {w * h} bits of 0/1")
        rows = np.array([c == "1" for c in bits], bool).reshape(h, w)
        return cls(depth, offset if offset is not None else (0, 0), rows[::-1].T.copy())

    def to_json(self) -> dict:
        return {"depth": self.depth, "cells": self.cells.tolist()}

    @classmethod
    def from_json(cls, d: dict):
        for key in ("depth", "cells"):
            if key not in d:
                raise PreconditionError(f"region JSON: missing field '{key}'")
        return cls.from_cells(int(d["depth"]), d["cells"])


def perimeter_edges(mask) -> int:
    """Number of lattice edges between filled and empty cells (outside counts as empty)."""
    p = np.pad(np.asarray(mask, bool), 1)
    return int(np.count_nonzero(p[1:] != p[:-1]) + np.count_nonzero(p[:, 1:] != p[:, :-1]))


def _oriented_edges(mask, offset):
    p = np.pad(np.asarray(mask, bool), 1)
    ox, oy = int(offset[0]) - 1, int(offset[1]) - 1
    edges = []
    # vertical edges at x = i between columns i-1 and i
    a, b = p[:-1, :], p[1:, :]
    for i, j in np.argwhere(a != b):
        x, y = ox + i + 1, oy + j
        if a[i, j]:   # region on the left (west): travel upward
            edges.append(((x, y), (x, y + 1)))
        else:
            edges.append(((x, y + 1), (x, y)))
    a, b = p[:, :-1], p[:, 1:]
    for i, j in np.argwhere(a != b):
        x, y = ox + i, oy + j + 1
        if a[i, j]:   # region below: travel in -x
            edges.append(((x + 1, y), (x, y)))
        else:
            edges.append(((x, y), (x + 1, y)))
    edges.sort()
    return edges


# -- min-cut core --------------------------------------------------------------

def _cut_weights(lam, depth):
    """Integer edge and area weights proportional to ``h`` and ``lam h^2``, if exact."""
    f = Fraction(lam)
    # h : lam h^2  ==  2^g q : p   for lam = p / q
    return f.denominator << depth, f.numerator


def _min_cut_labels(E, fixed, pair, area):
    """Binary labelling F minimising

        pair * #(interior edges with F_a != F_b)
      + pair * sum_c fixed[c] * (F_c != outside label)   [sides facing fixed cells]
      + area * #(c : F_c != E_c)

    ``fixed`` is a pair ``(n_empty, n_full)`` of per-cell counts of sides that
    face cells held at 0 and at 1.  All weights are non-negative integers.
    Returns ``(F, value)``; among optimal labellings F is the smallest set.
    """
    n_empty, n_full = fixed
    nx, ny = E.shape
    N = nx * ny
    if N == 0:
        return np.zeros_like(E), 0
    idx = np.arange(N).reshape(nx, ny)
    s, t = N, N + 1
    # terminal capacities: cost paid if F_c = 1 sits on the sink side edge c->t,
    # cost paid if F_c = 0 sits on s->c.
    cost1 = area * (~E).astype(np.int64) + pair * n_empty.astype(np.int64)
    cost0 = area * E.astype(np.int64) + pair * n_full.astype(np.int64)
    # common part cancels
    m = np.minimum(cost0, cost1)
    const = int(m.sum())
    cost0, cost1 = cost0 - m, cost1 - m
    rows, cols, caps = [], [], []
    flat = idx.ravel()
    c0, c1 = cost0.ravel(), cost1.ravel()
    sel = c0 > 0
    rows.append(np.full(sel.sum(), s)); cols.append(flat[sel]); caps.append(c0[sel])
    sel = c1 > 0
    rows.append(flat[sel]); cols.append(np.full(sel.sum(), t)); caps.append(c1[sel])
    if pair > 0:
        for a, b in ((idx[:-1, :], idx[1:, :]), (idx[:, :-1], idx[:, 1:])):
            a, b = a.ravel(), b.ravel()
            rows += [a, b]
            cols += [b, a]
            caps += [np.full(len(a), pair), np.full(len(a), pair)]
    rows = np.concatenate(rows).astype(np.int64)
    cols = np.concatenate(cols).astype(np.int64)
    caps = np.concatenate(caps).astype(np.int64)
    total = int(c0.sum()) + 1
    if total <= _INT32_MAX and len(caps) and caps.max() <= _INT32_MAX:
        F, cut = _scipy_cut(rows, cols, caps, N, s, t)
    else:
        F, cut = _networkx_cut(rows, cols, caps, N, s, t)
    return F.reshape(nx, ny), cut + const


def _scipy_cut(rows, cols, caps, N, s, t):
    G = scipy.sparse.csr_matrix((caps.astype(np.int32), (rows, cols)), shape=(N + 2, N + 2))
    G.sum_duplicates()
    res = maximum_flow(G, s, t)
    flow = res.flow.tocsr()
    resid = (G - flow).tocsr()
    resid.data = np.where(resid.data > 0, 1, 0).astype(np.int32)
    resid.eliminate_zeros()
    reach = breadth_first_order(resid, s, directed=True, return_predecessors=False)
    F = np.zeros(N + 2, bool)
    F[reach] = True
    return F[:N], int(res.flow_value)


def _networkx_cut(rows, cols, caps, N, s, t):
    import networkx as nx  # only needed for capacities beyond int32

    G = nx.DiGraph()
    G.add_nodes_from(range(N + 2))
    for a, b, c in zip(rows.tolist(), cols.tolist(), caps.tolist()):
        if G.has_edge(a, b):
            G[a][b]["capacity"] += c
        else:
            G.add_edge(a, b, capacity=c)
    value, (S, _) = nx.minimum_cut(G, s, t)
    F = np.zeros(N + 2, bool)
    F[list(S)] = True
    return F[:N], int(value)


@dataclass
class FlatNormDecomposition:
    """Optimal fill S (cells where the residual region F differs from E) and the split of F_lambda."""

    lam: float
    depth: int
    offset: np.ndarray
    E: np.ndarray
    F: np.ndarray
    residual_edges: int

    @property
    def side(self) -> float:
        return math.ldexp(1.0, -self.depth)

    @property
    def S(self) -> np.ndarray:
        return self.E ^ self.F

    @property
    def S_sign(self) -> np.ndarray:
        """+1 where a region cell is removed, -1 where an empty cell is filled."""
        return self.E.astype(np.int8) - self.F.astype(np.int8)

    @property
    def cells_of_S(self) -> np.ndarray:
        return np.argwhere(self.S) + self.offset

    @property
    def residual_mass(self) -> float:
        return self.residual_edges * self.side

    @property
    def area_S(self) -> float:
        return int(self.S.sum()) * self.side**2

    @property
    def area_term(self) -> float:
        return self.lam * self.area_S

    @property
    def value(self) -> float:
        return self.residual_mass + self.area_term

    def to_json(self) -> dict:
        return {
            "lambda": self.lam,
            "value": self.value,
            "residual_mass": self.residual_mass,
            "area_term": self.area_term,
            "cells_of_S": self.cells_of_S.tolist(),
            "grid_depth": self.depth,
        }


def flat_norm_decompose(region: BinaryRegion, lam: float) -> FlatNormDecomposition:
    """Exact discrete flat norm decomposition of the region's boundary chain."""
    if not lam > 0:
        raise PreconditionError(f"lambda must be positive, got {lam}")
    g = region.depth
    if region.mask.size == 0 or not region.mask.any():
        z = np.zeros((0, 0), bool)
        return FlatNormDecomposition(float(lam), g, np.zeros(2, np.int64), z, z, 0)
    # the optimal F lies inside the bounding box of E, so one frame of empty cells suffices
    reg = region.cropped()
    E = reg.mask
    pair, area = _cut_weights(lam, g)
    n_empty = _outer_sides(E.shape)
    n_full = np.zeros(E.shape, np.int64)
    F, _ = _min_cut_labels(E, (n_empty, n_full), pair, area)
    edges = perimeter_edges(F)
    return FlatNormDecomposition(float(lam), g, reg.offset, E, F, edges)


def _outer_sides(shape):
    n = np.zeros(shape, np.int64)
    if n.size == 0:
        return n
    n[0, :] += 1
    n[-1, :] += 1
    n[:, 0] += 1
    n[:, -1] += 1
    return n


@dataclass
class RelativeDecomposition:
    """Flat norm decomposition of the piece of T inside an open cube."""

    cube: DyadicCube
    lam: float
    depth: int
    E: np.ndarray
    F: np.ndarray
    interior_edges: int    # |T restricted to the open cube| in edges
    residual_edges: int

    @property
    def side(self) -> float:
        return math.ldexp(1.0, -self.depth)

    @property
    def S(self) -> np.ndarray:
        return self.E ^ self.F

    @property
    def area_S(self) -> float:
        return int(self.S.sum()) * self.side**2

    @property
    def value(self) -> float:
        return self.residual_edges * self.side + self.lam * self.area_S


def relative_decompose(region: BinaryRegion, lo, n_cells, lam: float):
    """Decompose ``T`` restricted to the open square of ``n_cells`` grid cells at ``lo``.

    The chain is the set of region-boundary edges strictly inside the
    square; S ranges over the cells of the square.  Sides of S on the
    square's boundary count as residual mass (T has no mass there).
    Returns ``(E, F, interior_edges, residual_edges)``.
    """
    g = region.depth
    E = region.window(lo, (n_cells, n_cells))
    pair, area = _cut_weights(lam, g)
    # a side on the square boundary costs pair whenever F_c != E_c
    border = _outer_sides(E.shape)
    n_empty = np.where(E, 0, border)
    n_full = np.where(E, border, 0)
    F, _ = _min_cut_labels(E, (n_empty, n_full), pair, area)
    interior = int(np.count_nonzero(E[1:] != E[:-1]) + np.count_nonzero(E[:, 1:] != E[:, :-1]))
    resid = int(np.count_nonzero(F[1:] != F[:-1]) + np.count_nonzero(F[:, 1:] != F[:, :-1])
                + np.sum(border[F != E]))
    return E, F, interior, resid


def beta_flat_detail(region: BinaryRegion, cube: DyadicCube, k: int = 1,
                     tripled: bool = False) -> RelativeDecomposition:
    if k not in (1, 2, 3):
        raise PreconditionError(f"k must be 1, 2 or 3, got {k}")
    d = cube.depth
    g = region.depth
    if g - d < 3:
        raise PreconditionError(f"grid depth {g} must exceed cube depth {d} by at least 3")
    n = 1 << (g - d)
    lo = np.asarray(cube.index, np.int64) << (g - d)
    if tripled:
        lo = lo - n
        n = 3 * n
    lam = math.ldexp(1.0, d + k)
    E, F, interior, resid = relative_decompose(region, lo, n, lam)
    if interior == 0:
        F = E.copy()
        resid = 0
    return RelativeDecomposition(cube, lam, g, E, F, interior, resid)


def beta_flat(region: BinaryRegion, cube: DyadicCube, k: int = 1, tripled: bool = False) -> float:
    """Flat-norm beta number ``lambda * L^2(S_d) / l`` with ``lambda = 2^(d+k)``.

    On the cube itself this is ``2^(2d+k) L^2(S_d)``; with ``tripled`` the
    decomposition runs on 3C (same lambda) and is divided by ``l(3C)``.
    """
    det = beta_flat_detail(region, cube, k, tripled)
    side = cube.side * (3 if tripled else 1)
    return det.lam * det.area_S / side


@dataclass
class BetaFlatReport:
    k: int
    d_min: int
    d_max: int
    rows: list          # (d, m1, m2, beta_F)
    per_depth: dict

    @property
    def total(self) -> float:
        return float(math.fsum(self.per_depth.values()))

    def subtotal_ratios(self) -> list:
        d = sorted(self.per_depth)
        return [self.per_depth[b] / self.per_depth[a] if self.per_depth[a] > 0 else math.nan
                for a, b in zip(d[:-1], d[1:])]

    def summary(self) -> dict:
        return {"k": self.k, "d_min": self.d_min, "d_max": self.d_max,
                "per_depth": {str(d): v for d, v in sorted(self.per_depth.items())},
                "total": self.total, "truncated": True}


def beta_flat_sum(region: BinaryRegion, k: int, d_range, tripled: bool = True) -> BetaFlatReport:
    """Truncated ``sum (beta_F(3C))^2 l(C)`` over cubes whose 3C meets the boundary chain."""
    d_min, d_max = int(d_range[0]), int(d_range[1])
    if d_min > d_max:
        raise PreconditionError(f"d_min={d_min} exceeds d_max={d_max}")
    g = region.depth
    rows, per_depth = [], {}
    edges = region.boundary_edges()
    for d in range(d_min, d_max + 1):
        if g - d < 3:
            raise PreconditionError(f"grid depth {g} must exceed cube depth {d} by at least 3")
        if not edges:
            per_depth[d] = 0.0
            continue
        # cubes meeting the boundary chain (edge midpoints, closed cubes)
        mids = np.array([[(a[0] + b[0]) / 2, (a[1] + b[1]) / 2] for a, b in edges])
        q = mids / (1 << (g - d))
        cand = set()
        for dx in (0, -1):
            for dy in (0, -1):
                cell = np.floor(q + np.array([dx, dy]) * (q == np.floor(q))).astype(np.int64)
                cand.update(map(tuple, cell.tolist()))
        terms = []
        side = math.ldexp(1.0, -d)
        for m in sorted(cand):
            b = beta_flat(region, DyadicCube(d, m), k, tripled)
            rows.append((d, m[0], m[1], b))
            terms.append(b * b * side)
        per_depth[d] = float(math.fsum(terms))
    return BetaFlatReport(k, d_min, d_max, rows, per_depth)
