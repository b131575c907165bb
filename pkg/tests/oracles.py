"""Reference computations that share no code with the package under test."""
import itertools
import math
from fractions import Fraction

import numpy as np


def disk_cube_count_bruteforce(cx, cy, r, depth, lo=-2, hi=2):
    """Count depth-d cubes of [lo, hi]^2 meeting the open disk in positive area.

    A closed cube and a closed disk share an interior point exactly when the
    distance from the centre to the cube is strictly below r.  Uses exact
    rational arithmetic on the cube corners.
    """
    n = 1 << depth
    cx, cy, r = Fraction(cx), Fraction(cy), Fraction(r)
    count = 0
    for i in range(lo * n, hi * n):
        for j in range(lo * n, hi * n):
            x0, x1 = Fraction(i, n), Fraction(i + 1, n)
            y0, y1 = Fraction(j, n), Fraction(j + 1, n)
            dx = max(x0 - cx, Fraction(0), cx - x1)
            dy = max(y0 - cy, Fraction(0), cy - y1)
            if dx * dx + dy * dy < r * r:
                count += 1
    return count


def perimeter_of(mask):
    """Lattice perimeter by walking every cell and counting empty 4-neighbours."""
    mask = np.asarray(mask, bool)
    nx, ny = mask.shape
    total = 0
    for i in range(nx):
        for j in range(ny):
            if not mask[i, j]:
                continue
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                a, b = i + di, j + dj
                if not (0 <= a < nx and 0 <= b < ny) or not mask[a, b]:
                    total += 1
    return total


def flat_norm_exhaustive(E, lam, h):
    """min over all subsets S of the window of  h*per(E xor S) + lam*h^2*|S|.

    All 2^(cells) subsets are enumerated with bit arithmetic; cells outside the
    window are empty.  Returns the minimum value as a float.
    """
    E = np.asarray(E, bool)
    nx, ny = E.shape
    N = nx * ny
    masks = np.arange(1 << N, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(N)) & 1).astype(bool).reshape(-1, nx, ny)
    F = bits ^ E[None]
    P = np.pad(F, ((0, 0), (1, 1), (1, 1)))
    per = (P[:, 1:, :] != P[:, :-1, :]).sum(axis=(1, 2)) + (P[:, :, 1:] != P[:, :, :-1]).sum(axis=(1, 2))
    area = bits.sum(axis=(1, 2))
    vals = per * h + lam * h * h * area
    return float(vals.min())


def flat_norm_column_dp(E, lam, h, outside_open=False):
    """Exact minimum of the same objective by dynamic programming over columns.

    The state is the full 0/1 labelling of one column of the residual region
    F = E xor S; every labelling of the window is a path through the states,
    so the result equals exhaustive enumeration.  With ``outside_open`` the
    window sides do not bound F (the relative, open-cube problem): a side on
    the window boundary then costs h exactly where F differs from E.
    """
    E = np.asarray(E, bool)
    nx, ny = E.shape
    states = np.array(list(itertools.product((0, 1), repeat=ny)), bool)
    hamming = (states[:, None, :] != states[None, :, :]).sum(axis=2)
    vert = (states[:, 1:] != states[:, :-1]).sum(axis=1)

    def column_cost(i):
        if outside_open:
            ends = (states[:, 0] != E[i, 0]).astype(int) + (states[:, -1] != E[i, -1])
        else:
            ends = states[:, 0].astype(int) + states[:, -1]
        area = (states != E[i]).sum(axis=1)
        return (vert + ends) * h + lam * h * h * area

    def side_cost(i):
        if outside_open:
            return (states != E[i]).sum(axis=1) * h
        return states.sum(axis=1) * h

    best = column_cost(0) + side_cost(0)
    for i in range(1, nx):
        best = column_cost(i) + (best[:, None] + hamming * h).min(axis=0)
    return float((best + side_cost(nx - 1)).min())


def arc_width_in_box(R, lo, hi, n_check=4096):
    """Exact slab width of the part of the circle |x| = R inside the closed box.

    The circle meets the box in arcs whose endpoints are circle-line
    intersections; for a single arc of angular span phi <= pi the width is
    the sagitta R (1 - cos(phi / 2)).  Returns (width, n_arcs, span).
    """
    cuts = [0.0, 2 * math.pi]
    for axis in (0, 1):
        for c in (lo[axis], hi[axis]):
            if abs(c) <= R:
                a = math.acos(c / R) if axis == 0 else math.asin(c / R)
                cand = [a, -a] if axis == 0 else [a, math.pi - a]
                cuts += [t % (2 * math.pi) for t in cand]
    cuts = sorted(set(cuts))
    inside = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        m = 0.5 * (a + b)
        x, y = R * math.cos(m), R * math.sin(m)
        if lo[0] <= x <= hi[0] and lo[1] <= y <= hi[1]:
            inside.append((a, b))
    # merge arcs across angle 0
    merged = []
    for a, b in inside:
        if merged and abs(merged[-1][1] - a) < 1e-15:
            merged[-1] = (merged[-1][0], b)
        else:
            merged.append((a, b))
    if len(merged) > 1 and merged[0][0] == 0.0 and abs(merged[-1][1] - 2 * math.pi) < 1e-15:
        first = merged.pop(0)
        last = merged.pop()
        merged.append((last[0], first[1] + 2 * math.pi))
    if len(merged) != 1:
        return math.nan, len(merged), math.nan
    span = merged[0][1] - merged[0][0]
    return R * (1 - math.cos(span / 2)), 1, span
