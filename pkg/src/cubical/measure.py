"""Estimators and bound checks: tube volumes, density, reach, cover sums."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dyadic import build_cover, cover_volume, tiling_of
from .errors import PreconditionError, ToleranceError, UnsupportedShapeError
from .shapes import (
    BallUnion,
    BoundaryOf,
    PointCloud,
    Shape,
    _axis_cells,
    _ball_cell_mask,
    _outer_sum,
    _paste,
    _sub_box,
    exact_measures,
    unit_ball_volume,
)


# -- tube volumes ----------------------------------------------------------------

@dataclass(frozen=True)
class TubeVolume:
    """Certified bracket ``lower <= L^n(W_r) <= upper``."""

    r: float
    lower: float
    upper: float
    depth: int

    @property
    def value(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.upper - self.lower)


@dataclass(frozen=True)
class MinkowskiEstimate:
    r: float
    value: float
    half_width: float
    tube: TubeVolume

    @property
    def lower(self) -> float:
        return self.tube.lower / (2 * self.r)

    @property
    def upper(self) -> float:
        return self.tube.upper / (2 * self.r)


def tube_volume(shape: Shape, r: float, rtol: float = 2e-3, max_depth: int = 18,
                max_cells: int = 1 << 22) -> TubeVolume:
    """Bracket the volume of ``{x : dist(x, W) < r}`` by adaptive cubical quadrature.

    The distance function is 1-Lipschitz, so a cell whose centre is at
    distance ``dc`` from ``W`` lies inside the tube when ``dc + rho < r`` and
    outside when ``dc - rho >= r`` (``rho`` is the half-diagonal).  Only the
    straddling cells are refined.
    """
    if not r > 0:
        raise PreconditionError(f"tube radius must be positive, got {r}")
    lo, hi = shape.bbox()
    n = shape.ndim
    lo = np.asarray(lo, float) - r
    hi = np.asarray(hi, float) + r
    depth = max(0, int(math.ceil(math.log2(2.0 / r))))
    ilo = np.floor(np.ldexp(lo, depth)).astype(np.int64)
    ihi = np.floor(np.ldexp(hi, depth)).astype(np.int64)
    grid = np.meshgrid(*[np.arange(a, b + 1) for a, b in zip(ilo, ihi)], indexing="ij")
    cells = np.stack([g.ravel() for g in grid], axis=1)
    children = np.array(np.meshgrid(*[[0, 1]] * n, indexing="ij")).reshape(n, -1).T
    inside = 0.0
    while True:
        h = math.ldexp(1.0, -depth)
        centers = np.ldexp((2 * cells + 1).astype(float), -depth - 1)
        dc = shape.distance(centers)
        rho = 0.5 * math.sqrt(n) * h
        vol = h**n
        is_in = dc + rho < r
        is_out = dc - rho >= r
        inside += np.count_nonzero(is_in) * vol
        cells = cells[~(is_in | is_out)]
        straddle = len(cells) * vol
        lower, upper = inside, inside + straddle
        if upper - lower <= rtol * (upper + lower) or len(cells) == 0:
            return TubeVolume(r, lower, upper, depth)
        if depth >= max_depth or len(cells) * 2**n > max_cells:
            achievable = (upper - lower) / max(upper + lower, 1e-300)
            raise ToleranceError(
                f"tube volume bracket reached relative half-width {achievable:.3g} "
                f"at depth {depth}; requested {rtol:.3g}", achievable)
        cells = (2 * cells[:, None, :] + children[None]).reshape(-1, n)
        depth += 1


def minkowski_content_estimate(shape: Shape, radii, rtol: float = 2e-3,
                               max_depth: int = 18) -> list:
    """``L^n(W_r) / (2r)`` for each radius, with certified bracket half-widths."""
    if isinstance(shape, PointCloud) and len(shape) == 0:
        raise PreconditionError("Minkowski content of an empty shape is undefined")
    out = []
    for r in radii:
        tv = tube_volume(shape, float(r), rtol=rtol, max_depth=max_depth)
        out.append(MinkowskiEstimate(float(r), tv.value / (2 * r), tv.half_width / (2 * r), tv))
    return out


# -- density of a union of balls ---------------------------------------------------

@dataclass
class DensityReport:
    theta: float
    theta_upper: float
    per_tiling_counts: np.ndarray
    per_tiling_bound: float
    bound: float
    cover_count: int
    cover_volume: float
    volume: float
    volume_exact: bool
    depth: int

    @property
    def chain_holds(self) -> bool:
        """``|cover| <= sum_i N_i``."""
        return self.cover_count <= self.bound

    @property
    def tilings_hold(self) -> bool:
        return bool(np.all(self.per_tiling_counts <= self.per_tiling_bound))

    @property
    def volume_bound_holds(self) -> bool:
        """``L^n(cover) <= L^n(E) / theta``."""
        return self.cover_volume <= self.volume / self.theta

    @property
    def holds(self) -> bool:
        return self.chain_holds and self.tilings_hold and self.volume_bound_holds


def _block_sum(a, size):
    """Sum non-overlapping ``size``-blocks of an n-d array."""
    n = a.ndim
    shape = []
    for s in a.shape:
        shape += [s // size, size]
    return a.reshape(shape).sum(axis=tuple(range(1, 2 * n, 2)))


def _box3_sum(a):
    """Sum over the 3^n neighbourhood of each entry (entries outside count 0)."""
    n = a.ndim
    p = np.pad(a, 1)
    out = np.zeros_like(a)
    for off in np.ndindex(*(3,) * n):
        sl = tuple(slice(o, o + s) for o, s in zip(off, a.shape))
        out += p[sl]
    return out


def density_theta(ball_union: BallUnion, depth: int, refine: int = 2) -> DensityReport:
    """Lower-bound the 3C densities of a union of balls and check the counting chain.

    For every cube C of the depth-``d`` cover, ``L^n(3C & E) / L^n(3C)`` is
    bracketed by counting sub-cells ``refine`` levels deeper that are
    certified inside a ball (lower) or touching one (upper); ``theta`` is
    the smallest lower bracket, so it is a valid density lower bound.
    """
    if not isinstance(ball_union, BallUnion):
        raise UnsupportedShapeError("density_theta needs a ball_union shape")
    r = ball_union.common_radius
    if r is None:
        raise PreconditionError("density_theta needs balls of a common radius")
    if not math.ldexp(1.0, -depth) < r / 4:
        raise PreconditionError(
            f"depth {depth} too shallow: need 2^-d < r/4 = {r / 4} (cubes much smaller than balls)")
    cover = build_cover(ball_union, depth)
    n = cover.ndim
    q = int(refine)
    fine_depth = depth + q
    k = 1 << q
    # coarse box: the cover's box grown by one cell for the 3C neighbourhoods
    clo = cover.offset - 1
    ccounts = np.array(cover.mask.shape) + 2
    flo = clo * k
    fcounts = ccounts * k
    inside = np.zeros(tuple(fcounts), dtype=bool)
    touch = np.zeros(tuple(fcounts), dtype=bool)
    for c in ball_union.centers:
        sub = _sub_box(flo, fcounts, c - r, c + r, fine_depth)
        if sub is None:
            continue
        slo, scounts = sub
        t = _ball_cell_mask(c, r, fine_depth, slo, scounts, "open")
        _paste(touch, flo, slo, t)
        _paste(inside, flo, slo, _cells_inside_ball(c, r, fine_depth, slo, scounts))
    lo_counts = _box3_sum(_block_sum(inside.astype(np.int64), k))
    hi_counts = _box3_sum(_block_sum(touch.astype(np.int64), k))
    cells_3c = 3**n * k**n
    sel = np.pad(cover.mask, 1)
    theta = float(lo_counts[sel].min()) / cells_3c
    theta_upper = float(hi_counts[sel].min()) / cells_3c

    per_tiling = np.zeros(3**n, dtype=np.int64)
    for idx in cover.indices:
        per_tiling[tiling_of(idx)] += 1

    em = exact_measures(ball_union)
    if em.volume is not None:
        volume, exact = em.volume, True
    else:
        volume = float(np.count_nonzero(inside)) * math.ldexp(1.0, -n * fine_depth)
        exact = False
    vol_3c = 3**n * math.ldexp(1.0, -n * depth)
    if theta <= 0:
        raise PreconditionError(
            f"a cover cube's 3C has no certified ball mass at refine={refine}; increase refine")
    n_i = volume / (theta * vol_3c)
    return DensityReport(theta, theta_upper, per_tiling, n_i, 3**n * n_i, len(cover),
                         cover_volume(cover), volume, exact, depth)


def _cells_inside_ball(center, r, depth, ilo, counts):
    counts = tuple(int(c) for c in counts)
    los, his = _axis_cells(depth, ilo, counts)
    far = [np.maximum((lo - c) ** 2, (hi - c) ** 2) for lo, hi, c in zip(los, his, center)]
    out = np.zeros(counts, dtype=bool)
    for s, tot in _outer_sum(far, counts):
        out[s:s + tot.shape[0]] = tot <= r * r
    return out


# -- reach ----------------------------------------------------------------------

def reach_estimate(samples: PointCloud, chunk: int = 512) -> float:
    """Point-cloud reach: ``inf |y-x|^2 / (2 dist(y-x, T_x))`` over ordered pairs.

    Pairs with ``y - x`` on the tangent line of ``x`` are skipped; a flat
    sample returns ``math.inf``.  The value is an upper bound for the reach
    of the sampled curve and decreases as samples are added.
    """
    if samples.theta is None:
        raise PreconditionError("reach_estimate needs tangent angles on the samples")
    p = samples.points
    if len(p) < 2:
        raise PreconditionError("reach_estimate needs at least two samples")
    t = np.column_stack([np.cos(samples.theta), np.sin(samples.theta)])
    best = math.inf
    for s in range(0, len(p), chunk):
        x = p[s:s + chunk]
        tx = t[s:s + chunk]
        v = p[None, :, :] - x[:, None, :]
        off = np.abs(tx[:, None, 0] * v[..., 1] - tx[:, None, 1] * v[..., 0])
        sq = np.einsum("ijk,ijk->ij", v, v)
        ok = off > 0
        if np.any(ok):
            best = min(best, float(np.min(sq[ok] / (2 * off[ok]))))
    return best


# -- curvature tube bound ------------------------------------------------------------

@dataclass(frozen=True)
class CurvatureBound:
    """Largest principal curvature of a C^{1,1} boundary and the matching reach."""

    kappa_hat: float
    reach_value: float

    @classmethod
    def from_reach(cls, reach: float) -> "CurvatureBound":
        if reach < 0:
            raise PreconditionError("reach must be non-negative")
        if reach == 0:
            return cls(math.inf, 0.0)
        return cls(0.0 if math.isinf(reach) else 1.0 / reach, reach)

    @classmethod
    def from_kappa(cls, kappa_hat: float) -> "CurvatureBound":
        if kappa_hat < 0:
            raise PreconditionError("kappa_hat must be non-negative")
        return cls(kappa_hat, math.inf if kappa_hat == 0 else 1.0 / kappa_hat)


@dataclass(frozen=True)
class TubeBound:
    upper_ratio: float
    d_epsilon: int | None
    tube_volume_upper: float
    volume_upper: float


def tube_volume_bound(kappa_hat: float, epsilon: float, ambient_dim: int,
                      boundary_measure: float, volume: float) -> TubeBound:
    """Curvature bound ``L^n(E_eps) <= (1 + eps kappa)^n L^n(E)``.

    ``d_epsilon`` is the first depth whose cube diameter ``sqrt(n) 2^-d`` is
    at most ``epsilon`` (``None`` for ``epsilon == 0``).  The shell estimate
    ``H^{n-1}(bdry) ((1 + eps kappa)^n - 1) / (n kappa)`` is also returned.
    """
    if kappa_hat < 0 or epsilon < 0:
        raise PreconditionError("kappa_hat and epsilon must be non-negative")
    if not epsilon * kappa_hat < 1:
        raise PreconditionError(f"need epsilon * kappa_hat < 1, got {epsilon * kappa_hat}")
    if not volume > 0:
        raise PreconditionError("volume must be positive")
    n = ambient_dim
    ratio = (1 + epsilon * kappa_hat) ** n
    if kappa_hat > 0:
        shell = boundary_measure * (ratio - 1) / (n * kappa_hat)
    else:
        shell = boundary_measure * epsilon
    d_eps = None if epsilon == 0 else int(math.ceil(math.log2(math.sqrt(n) / epsilon)))
    return TubeBound(ratio, d_eps, shell, ratio * volume)


@dataclass(frozen=True)
class MinkowskiCoverCheck:
    depth: int
    r_d: float
    minkowski: MinkowskiEstimate
    delta: float
    delta_hat: float
    cover_volume: float
    volume: float

    @property
    def bound(self) -> float:
        return (1 + self.delta_hat) * self.volume

    @property
    def holds(self) -> bool:
        return self.cover_volume <= self.bound


def mink_cover_bound_check(shape: Shape, depth: int, delta: float = 0.0,
                           rtol: float = 2e-3) -> MinkowskiCoverCheck:
    """Check ``L^n(C^E_d) <= (1 + delta_hat) L^n(E)`` with ``r = sqrt(n) 2^-d``.

    ``delta_hat = (M(bdry E) 2 r + delta) / L^n(E)`` where the Minkowski
    content of the boundary is the tube estimate at radius ``r``.
    """
    em = exact_measures(shape)
    if not em.volume:
        raise PreconditionError(f"{shape.kind} has zero or unknown volume; the bound needs L^n(E) != 0")
    n = shape.ndim
    r_d = math.sqrt(n) * math.ldexp(1.0, -depth)
    est = minkowski_content_estimate(BoundaryOf(shape), [r_d], rtol=rtol)[0]
    delta_hat = (est.value * 2 * r_d + delta) / em.volume
    cv = cover_volume(build_cover(shape, depth))
    return MinkowskiCoverCheck(depth, r_d, est, delta, delta_hat, cv, em.volume)


# -- Hausdorff cover sum ---------------------------------------------------------------

def hausdorff_box_estimate(shape: Shape, k: float, depth: int) -> float:
    """``sum_C alpha(k) (diam C / 2)^k`` over the depth-``d`` cover of ``shape``.

    The dyadic cover is one admissible cover of diameter ``sqrt(n) 2^-d``, so
    this bounds the size-``delta`` Hausdorff pre-measure from above; it is
    not the infimum over all covers.
    """
    n = shape.ndim
    if not 0 <= k <= n:
        raise PreconditionError(f"k must lie in [0, {n}], got {k}")
    count = len(build_cover(shape, depth))
    diam = math.sqrt(n) * math.ldexp(1.0, -depth)
    return count * unit_ball_volume(k) * (diam / 2) ** k
