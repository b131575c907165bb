"""The twelve acceptance criteria, each at its stated tolerance and time budget.

Run alone with ``pytest tests/test_acceptance.py -v``; the terminal summary
prints one PASS/FAIL line per criterion.
"""
import math
import time

import numpy as np
import pytest

from cubical.dyadic import (
    DyadicCube, boundary_area, build_cover, cover_boundary, cover_volume, cover_volume_exact,
)
from cubical.families import generate_shape, koch_vertices
from cubical.flatnorm import BinaryRegion, beta_flat, beta_flat_detail, flat_norm_decompose
from cubical.jones import beta_squared_sum, slab_width, slab_width_sweep
from cubical.measure import (
    density_theta, hausdorff_box_estimate, mink_cover_bound_check, minkowski_content_estimate,
    reach_estimate,
)
from cubical.shapes import (
    BallUnion, BoundaryOf, DenseUnitCube, Disk, PointCloud, Polygon, Polyline, exact_measures,
    sample_boundary,
)
from cubical.varifold import lift_curve, monotone_theta_runs, quantization_deviation, quantize_lift

from oracles import flat_norm_column_dp, flat_norm_exhaustive


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def test_criterion_01_ball_cover_volume_bound():
    with Timer() as t:
        disk = Disk((0, 0), 1.0)
        ratios = {}
        for d in (6, 8, 10):
            r = cover_volume(build_cover(disk, d)) / math.pi
            assert r <= (1 + math.sqrt(2) * 2.0**-d) ** 2
            ratios[d] = r
        assert ratios[6] > ratios[8] > ratios[10] >= 1
        assert ratios[10] - 1 < 0.02
    assert t.elapsed < 5


def test_criterion_02_pathological_cover():
    with Timer() as t:
        shape = DenseUnitCube(2)
        assert exact_measures(shape).volume == 0
        for d in range(0, 11):
            assert cover_volume_exact(build_cover(shape, d)) == 1
    assert t.elapsed < 1


def test_criterion_03_union_of_balls_chain():
    with Timer() as t:
        for seed in range(20):
            bu = generate_shape("ball-union-random", seed=seed, count=5, radius=1.0)
            rep = density_theta(bu, 7)
            assert rep.cover_count <= rep.bound, seed
            assert rep.tilings_hold, seed
            assert rep.cover_volume <= rep.volume / rep.theta, seed
    assert t.elapsed < 60


def test_criterion_04_minkowski_bound():
    with Timer() as t:
        chk = mink_cover_bound_check(Disk((0, 0), 1.0), 8)
        assert chk.cover_volume <= (1 + chk.delta_hat) * math.pi
        est = minkowski_content_estimate(BoundaryOf(Disk((0, 0), 1.0)), [0.05])[0]
        assert est.lower <= 2 * math.pi <= est.upper
        assert abs(est.value - 2 * math.pi) <= 0.01 * 2 * math.pi
        assert est.half_width <= 0.01 * 2 * math.pi
    assert t.elapsed < 30


def test_criterion_05_boundary_ratios():
    with Timer() as t:
        square = Polygon([[0, 0], [1, 0], [1, 1], [0, 1]])
        for d in range(0, 13):
            assert boundary_area(cover_boundary(build_cover(square, d))) / 4.0 == 1.0
        diamond = Polygon([[0.5, 0.0], [1.0, 0.5], [0.5, 1.0], [0.0, 0.5]])
        r = boundary_area(cover_boundary(build_cover(diamond, 10))) / (2 * math.sqrt(2))
        assert abs(r - math.sqrt(2)) <= 0.02
        disk = Disk((0, 0), 1.0)
        for d in range(4, 13):
            r = boundary_area(cover_boundary(build_cover(disk, d))) / (2 * math.pi)
            assert 1 <= r <= 2.1
    assert t.elapsed < 20


def test_criterion_06_reach():
    with Timer() as t:
        est = reach_estimate(sample_boundary(Disk((0, 0), 2.0), 0.01))
        assert 1.98 <= est <= 2.0
        spacing = 0.01
        tangent = BallUnion([[0, 0], [2, 0]], 1.0)
        assert reach_estimate(sample_boundary(tangent, spacing)) <= 2 * spacing
    assert t.elapsed < 10


def test_criterion_07_jones_beta():
    with Timer() as t:
        seg = sample_boundary(Polyline([[0, 1 / 3], [1, 1 / 3]]), 2.0**-12)
        assert beta_squared_sum(seg, 2, 10).beta_squared_sum == 0.0
        circle = sample_boundary(Disk((0, 0), 1.0), 2.0**-13)
        ratios = beta_squared_sum(circle, 5, 10).subtotal_ratios()
        assert all(abs(r - 0.25) <= 0.05 for r in ratios), ratios
        koch = sample_boundary(Polyline(koch_vertices(3)), 2.0**-12)
        koch_ratios = beta_squared_sum(koch, 2, 6).subtotal_ratios()
    assert t.elapsed < 60
    # level 3 has straight pieces of length 1/27, so cubes finer than that
    # start to see a polygon and the subtotals begin to fall
    assert all(r >= 0.9 for r in koch_ratios), f"Koch level-3 ratios d=2..6: {koch_ratios}"


def test_criterion_08_slab_width_oracle():
    rng = np.random.default_rng(20240)
    with Timer() as t:
        worst = 0.0
        for _ in range(200):
            k = int(rng.integers(3, 51))
            pts = rng.normal(size=(k, 2)) * rng.uniform(0.1, 3, size=2)
            worst = max(worst, abs(slab_width(pts) - slab_width_sweep(pts, n_angles=100_000)))
        assert worst <= 1e-6
    assert t.elapsed < 30


def test_criterion_09_varifold_quantization():
    with Timer() as t:
        lift = lift_curve(Disk((0, 0), 1.0), 2.0**-6)
        q = quantize_lift(lift, 4)
        assert quantization_deviation(lift, q).max() <= math.sqrt(3) * 2.0**-5
        runs = monotone_theta_runs(lift)
        assert len(runs) == 2
        for a, b in runs:
            th = lift.theta[np.arange(a, b) % len(lift)]
            assert np.all(np.diff(th) > 0)
            assert th[0] < 0.1 and th[-1] > math.pi - 0.1
    assert t.elapsed < 5


def test_criterion_10_flat_norm():
    rng = np.random.default_rng(10)
    with Timer() as t:
        g4 = 4
        for _ in range(50):
            E = rng.random((4, 4)) < 0.5
            lam = float(rng.choice([0.5, 2.0, 8.0, 32.0]))
            got = flat_norm_decompose(BinaryRegion(g4, (0, 0), E), lam).value
            assert got == pytest.approx(flat_norm_exhaustive(E, lam, 2.0**-g4), abs=1e-12)
        R, g = 1.0, 7
        region = BinaryRegion.from_shape(Disk((0, 0), R), g)
        small = flat_norm_decompose(region, 0.5 / R)
        covered = np.count_nonzero(small.S & small.E) / region.mask.sum()
        assert covered >= 0.95
        assert abs(small.value - 0.5 / R * math.pi * R**2) <= 0.1 * 0.5 / R * math.pi * R**2
        large = flat_norm_decompose(region, 8.0 / R)
        n_s = int(large.S.sum())
    assert t.elapsed < 120
    # lattice-edge mass: a flat run of m < 2/(lambda h) boundary cells is
    # cheaper to shave than to keep, so the digitized disk is not left intact
    assert n_s == 0, f"lambda = 8/R removes {n_s} cells (value {large.value:.6g} < mass(T) {region.boundary_mass:.6g})"


def test_criterion_11_beta_flat():
    with Timer() as t:
        g = 7
        n = 1 << g
        straight = np.zeros((n, n), bool)
        straight[:, :45] = True
        reg = BinaryRegion(g, (0, 0), straight)
        for d in range(0, g - 2):
            for i in range(1 << d):
                for j in range(1 << d):
                    assert beta_flat(reg, DyadicCube(d, (i, j)), k=1) == 0.0
        for g, d, k in [(6, 3, 1), (7, 4, 2), (8, 5, 3)]:
            m = 1 << (g - d)
            cube = DyadicCube(d, (2, (1 << d) // 2))
            lo = np.array(cube.index) * m
            mask = np.zeros((1 << g, 1 << g), bool)
            mask[:, :lo[1] + 3] = True
            mask[lo[0] + 4, lo[1] + 3] = True
            bump = BinaryRegion(g, (0, 0), mask)
            det = beta_flat_detail(bump, cube, k)
            oracle = flat_norm_column_dp(bump.window(lo, (m, m)), det.lam, 2.0**-g, outside_open=True)
            assert det.value == oracle
            assert beta_flat(bump, cube, k) == 2.0 ** (2 * d + k) * 4.0**-g
    assert t.elapsed < 30


def test_criterion_12_hausdorff_box_estimate():
    with Timer() as t:
        seg = Polyline([[0, 1 / 3], [1, 1 / 3]])
        errs = [abs(hausdorff_box_estimate(seg, 1, d) - math.sqrt(2)) for d in (8, 10, 12)]
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] <= 0.01 * math.sqrt(2)
        assert hausdorff_box_estimate(PointCloud([[0.3, 0.7]]), 1, 12) < 1e-3
    assert t.elapsed < 5
