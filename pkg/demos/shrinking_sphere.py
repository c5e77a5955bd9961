"""A round sphere moved by the level-set solver, next to its exact radius.

A sphere of radius r0 in R^3 shrinks as sqrt(r0^2 - 4t) and disappears at
r0^2 / 4.  The script evolves the truncated signed distance to the sphere
on an axisymmetric (r, z) grid, reads the radius off the zero crossing on
the z = 0 line and writes SVG frames next to itself.

    python demos/shrinking_sphere.py
"""

from pathlib import Path

import numpy as np

from graphmcf import Mode, make_grid, zero_crossings
from graphmcf.io import emit_svg_contours
from graphmcf.levelset import Ball, LevelSetProblem, solve_levelset, truncated_signed_distance
from graphmcf.oracles import RoundKind, RoundSolution, collapse_time, radius

h, r0 = 0.01, 0.5
grid = make_grid(Mode.AXISYM2D, h, 1.0, 1)
sphere = RoundSolution(RoundKind.SPHERE, 2, r0)
times = np.arange(1, 14) * 0.005

traj = solve_levelset(LevelSetProblem(truncated_signed_distance(Ball(r0), grid), times[-1]),
                      snap_times=times, fattening=False)

print(f"collapse time {collapse_time(sphere):.4f}")
print("   t      computed   exact")
for snap in traj:
    found = zero_crossings(snap)
    exact = radius(sphere, snap.time)
    print(f"{snap.time:.4f}  {found[-1] if found else float('nan'):9.5f}  "
          f"{exact if exact is not None else float('nan'):9.5f}")

out = Path(__file__).with_name("out_sphere")
paths = emit_svg_contours(traj, [0.0, 0.03, 0.06], out, "sphere")
print("wrote", *paths, sep="\n  ")
