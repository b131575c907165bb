"""How far a curve is from a line, cube by cube."""
import math

import numpy as np

from cubical import Disk, Polyline, sample_boundary
from cubical.families import koch_vertices
from cubical.jones import beta_squared_sum, slab_width, slab_width_sweep

rng = np.random.default_rng(0)
pts = rng.normal(size=(30, 2)) * [2.0, 0.3]
print(f"slab width of 30 points: hull calipers {slab_width(pts):.9f}, angle sweep {slab_width_sweep(pts):.9f}")

seg = sample_boundary(Polyline([[0, 1 / 3], [1, 1 / 3]]), 2.0**-12)
print("\nstraight segment, sum of beta^2 l over d=2..10:", beta_squared_sum(seg, 2, 10).beta_squared_sum)

circle = sample_boundary(Disk((0, 0), 1.0), 2.0**-13)
rep = beta_squared_sum(circle, 5, 10)
print("\nunit circle: each level is about a quarter of the one above")
for (d, v), r in zip(sorted(rep.per_depth.items()), [math.nan] + rep.subtotal_ratios()):
    print(f"  d={d:2d}  subtotal={v:.3e}  ratio={r:.3f}")

# the Koch curve is flat at no scale until the cubes resolve its straight pieces
for level in (3, 5):
    koch = sample_boundary(Polyline(koch_vertices(level)), 2.0**-12)
    ratios = beta_squared_sum(koch, 2, 6).subtotal_ratios()
    print(f"\nKoch level {level}: subtotal ratios d=2..6 ", " ".join(f"{r:.3f}" for r in ratios))
