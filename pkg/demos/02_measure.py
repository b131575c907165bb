"""Minkowski content, reach and the density chain for unions of balls."""
import math

from cubical import BallUnion, BoundaryOf, Disk, Polyline, PointCloud, sample_boundary
from cubical.families import generate_shape
from cubical.measure import (
    density_theta, hausdorff_box_estimate, mink_cover_bound_check, minkowski_content_estimate,
    reach_estimate,
)

circle = BoundaryOf(Disk((0, 0), 1.0))
print("Minkowski content of the unit circle (true value 2 pi = %.6f)" % (2 * math.pi))
for est in minkowski_content_estimate(circle, [0.2, 0.1, 0.05]):
    print(f"  r={est.r:<5}  [{est.lower:.5f}, {est.upper:.5f}]")

chk = mink_cover_bound_check(Disk((0, 0), 1.0), 8)
print(f"\ncover of disk at d=8: {chk.cover_volume:.5f} <= (1 + delta) pi = {(1 + chk.delta_hat) * math.pi:.5f}")

print("\nreach from boundary samples")
print(f"  disk r=2        {reach_estimate(sample_boundary(Disk((0, 0), 2.0), 0.01)):.5f}")
tangent = BallUnion([[0, 0], [2, 0]], 1.0)
print(f"  kissing disks   {reach_estimate(sample_boundary(tangent, 0.01)):.5f}")

print("\ndensity chain for random unions of five unit balls at d=7")
for seed in range(4):
    rep = density_theta(generate_shape("ball-union-random", seed=seed, count=5, radius=1.0), 7)
    print(f"  seed {seed}: theta={rep.theta:.4f}  |cover|={rep.cover_count} <= {rep.bound:.0f}  holds={rep.holds}")

seg = Polyline([[0, 1 / 3], [1, 1 / 3]])
print("\nbox-counting H^1 of a unit segment, cubes of side 2^-d")
for d in (6, 8, 10, 12):
    print(f"  d={d:2d}  {hausdorff_box_estimate(seg, 1, d):.5f}")
print(f"  a single point at d=12: {hausdorff_box_estimate(PointCloud([[0.3, 0.7]]), 1, 12):.2e}")
