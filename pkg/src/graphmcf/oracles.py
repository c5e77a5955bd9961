"""Exact round solutions of mean curvature flow and sphere barriers for graphs."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .fields import Mode, Trajectory

EXTINCT = None


class RoundKind(str, enum.Enum):
    SPHERE = "Sphere"
    CYLINDER = "Cylinder"


@dataclass(frozen=True)
class RoundSolution:
    """``Sphere`` of dimension ``m`` in R^{m+1}, or ``Cylinder`` S^m x R in R^{m+2}.

    Both shrink by ``dr/dt = -m/r`` starting from ``r0`` at ``t0``.
    """

    kind: RoundKind
    m: int
    r0: float
    t0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", RoundKind(self.kind))
        if not self.r0 > 0:
            raise ValueError("r0 must be positive")
        if self.m < 1:
            raise ValueError("m must be >= 1")


def radius(s: RoundSolution, t: float) -> float | None:
    """``sqrt(r0^2 - 2 m (t - t0))``, or ``EXTINCT`` after the collapse time."""
    if t < s.t0:
        raise ValueError(f"t={t} precedes t0={s.t0}")
    q = s.r0**2 - 2 * s.m * (t - s.t0)
    if q < -1e-15 * s.r0**2:
        return EXTINCT
    return float(np.sqrt(max(q, 0.0)))


def collapse_time(s: RoundSolution) -> float:
    return s.t0 + s.r0**2 / (2 * s.m)


@dataclass(frozen=True)
class Placement:
    """Sphere S^{n+1} centered at ``(x0, z0)`` in R^{n+2}, above or below the graph.

    ``x0`` is a radius for Radial1D graphs and a point for Cartesian graphs.
    """

    x0: float | tuple
    z0: float
    side: str

    def __post_init__(self):
        if self.side not in ("above", "below"):
            raise ValueError("side must be 'above' or 'below'")


def _graph_points(snap):
    grid = snap.grid
    vals = np.asarray(snap.values)
    finite = np.isfinite(vals)
    if grid.mode is Mode.RADIAL1D:
        return [grid.axis(0)[finite]], vals[finite]
    return [c[finite] for c in grid.mesh()], vals[finite]


def _clearance(snap, p: Placement, r: float) -> float:
    xs, zs = _graph_points(snap)
    if snap.grid.mode is Mode.RADIAL1D:
        # the closest point of each rotation orbit lies in the direction of x0
        dx2 = (xs[0] - float(p.x0)) ** 2
    else:
        x0 = np.broadcast_to(np.asarray(p.x0, dtype=float), (len(xs),))
        dx2 = sum((x - c) ** 2 for x, c in zip(xs, x0))
    return float(np.min(np.sqrt(dx2 + (zs - p.z0) ** 2)) - r)


def barrier_violation(traj: Trajectory, s: RoundSolution, placement: Placement) -> float:
    """Minimum over snapshots in ``[t0, collapse)`` of the graph's distance outside the sphere.

    Positive values mean the graph never enters the shrinking ball; the
    graph is sampled at its nodes.
    """
    if s.kind is not RoundKind.SPHERE:
        raise ValueError("barriers are spheres")
    snaps = [x for x in traj if x.time >= s.t0 - 1e-14]
    if not snaps:
        raise ValueError("no snapshot at or after t0")
    first = _clearance(snaps[0], placement, radius(s, snaps[0].time) or 0.0)
    if first < -1e-12:
        raise ValueError(f"placement crosses the graph at t0 (clearance {first:.6g})")
    worst = first
    for snap in snaps[1:]:
        r = radius(s, snap.time)
        if r is EXTINCT or r == 0.0:
            break
        worst = min(worst, _clearance(snap, placement, r))
    return worst


def hoelder_barriers(snap, index, M: float, a: float = 0.0, r: float | None = None):
    """The two barrier spheres of the time-Hoelder construction at node ``index``.

    Radius ``r <= 1/M``; centers at ``u(x0) +/- (M + 1) r`` directly above and
    below ``x0``.  Requires ``u(x0) - a <= -1``.
    """
    M = max(float(M), 1.0)
    r = 1.0 / M if r is None else r
    if r > 1.0 / M + 1e-15:
        raise ValueError("barrier radius must not exceed 1/M")
    u0 = float(np.asarray(snap.values)[index])
    if not u0 - a <= -1:
        raise ValueError("the construction needs u(x0) - a <= -1")
    grid = snap.grid
    if grid.mode is Mode.RADIAL1D:
        x0 = float(grid.axis(0)[index])
    else:
        x0 = tuple(float(c[index]) for c in grid.mesh())
    sphere = RoundSolution(RoundKind.SPHERE, grid.n + 1, r, float(snap.time))
    return (
        (sphere, Placement(x0, u0 + (M + 1) * r, "above")),
        (sphere, Placement(x0, u0 - (M + 1) * r, "below")),
    )
