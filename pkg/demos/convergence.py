"""Observed orders of accuracy against exact shrinking spheres.

The lower half of a shrinking sphere is a graph that the graph solver must
reproduce, and a round sphere is an exact solution for the level-set
solver.  Halving h (with dt proportional to h^2) should divide the error by
four, and halving dt at fixed h should divide the time-stepping error by two.

    python demos/convergence.py
"""

from graphmcf.convergence import (
    cap_spatial_study,
    cap_temporal_study,
    sphere_spatial_study,
    sphere_temporal_study,
)

for label, study in (
    ("graph, space", cap_spatial_study()),
    ("graph, time", cap_temporal_study()),
    ("level set, space", sphere_spatial_study()),
    ("level set, time", sphere_temporal_study()),
):
    errs = ", ".join(f"{e:.3e}" for e in study.errors)
    orders = ", ".join(f"{o:.2f}" for o in study.orders)
    print(f"{label:17s} errors {errs}   orders {orders}")
