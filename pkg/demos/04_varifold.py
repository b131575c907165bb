"""Lift a circle to position and tangent angle, then quantize."""
import math
import sys
from pathlib import Path

import numpy as np

from cubical import Disk
from cubical.svg import lift_svg
from cubical.varifold import lift_curve, monotone_theta_runs, quantization_deviation, quantize_lift

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo_out")
out.mkdir(parents=True, exist_ok=True)

lift = lift_curve(Disk((0, 0), 1.0), 2.0**-6)
print(f"{len(lift)} lifted samples, theta in [{lift.theta.min():.3f}, {lift.theta.max():.3f}]")

runs = monotone_theta_runs(lift)
print("theta sweeps 0 -> pi twice around the circle:", runs)

for d in (2, 3, 4, 5):
    q = quantize_lift(lift, d)
    dev = quantization_deviation(lift, q).max()
    print(f"  d={d}  cells={len(q.cells):5d}  max deviation={dev:.4f}  half diagonal={math.sqrt(3) * 2.0**-(d + 1):.4f}")

(out / "lift.svg").write_text(lift_svg(lift))
print(f"wrote {out / 'lift.svg'}")
