"""Dyadic covers of a disk, a square and a dense set of measure zero."""
import math
import sys
from pathlib import Path

from cubical import Disk, Polygon, DenseUnitCube, build_cover, cover_boundary, boundary_area, cover_volume
from cubical.dyadic import cover_volume_exact
from cubical.svg import cover_svg

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo_out")
out.mkdir(parents=True, exist_ok=True)

disk = Disk((0, 0), 1.0)
print("unit disk: cover volume / pi shrinks toward 1 as cubes refine")
for d in range(2, 11, 2):
    cov = build_cover(disk, d)
    bound = (1 + math.sqrt(2) * 2.0**-d) ** 2
    print(f"  d={d:2d}  cubes={len(cov):7d}  ratio={cover_volume(cov) / math.pi:.5f}  bound={bound:.5f}")

# a staircase never gets shorter: boundary length stays near 4/pi times the circle
print("\nboundary of the cover vs true perimeter")
for d in (4, 8, 12):
    r = boundary_area(cover_boundary(build_cover(disk, d))) / (2 * math.pi)
    print(f"  disk   d={d:2d}  ratio={r:.4f}")
diamond = Polygon([[0.5, 0.0], [1.0, 0.5], [0.5, 1.0], [0.0, 0.5]])
r = boundary_area(cover_boundary(build_cover(diamond, 10))) / (2 * math.sqrt(2))
print(f"  diamond d=10 ratio={r:.4f}  (sqrt 2 = {math.sqrt(2):.4f})")

# dyadic rationals: zero area, yet every cube meets them
dense = DenseUnitCube(2)
print("\ndense rationals in [0,1]^2 have measure 0, cover volume is", cover_volume_exact(build_cover(dense, 8)))

(out / "disk_cover.svg").write_text(cover_svg(build_cover(disk, 5), cover_boundary(build_cover(disk, 5))))
print(f"\nwrote {out / 'disk_cover.svg'}")
