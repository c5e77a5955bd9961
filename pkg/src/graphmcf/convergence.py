"""Grid-refinement studies against the shrinking sphere.

Two exact solutions are used.  The lower half of a shrinking sphere
``S^{n+1}`` is a radial graph (the hemisphere cap); it is evolved by the
graph scheme on a disc well inside the sphere, with the exact values held
outside.  A round sphere ``S^n`` is evolved by the level-set scheme and its
radius is read off the zero crossing.

Spatial orders refine ``h`` with ``dt`` proportional to ``h^2``, so both
error terms scale like ``h^2``.  Temporal orders fix ``h`` and compare
successive halvings of ``dt`` with each other, which cancels the spatial
error exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import GraphField, LevelSetField, Mode, make_grid, zero_crossings
from .graphflow import cfl_dt, step
from .levelset import LevelSetProblem, levelset_cfl, solve_levelset
from .oracles import RoundKind, RoundSolution, radius


@dataclass(frozen=True)
class RefinementStudy:
    sizes: tuple
    errors: tuple

    @property
    def orders(self) -> tuple:
        e = self.errors
        return tuple(math.log2(a / b) for a, b in zip(e, e[1:]))

    @property
    def order(self) -> float:
        """The smallest observed order over successive refinements."""
        return min(self.orders)


def _steps(T: float, dt_max: float) -> int:
    return max(int(math.ceil(T / dt_max - 1e-9)), 1)


# ---------------------------------------------------------------------------
# hemisphere cap (graph scheme)


def hemisphere_cap(r, t: float, rho0: float, n: int, center: float = 0.0) -> np.ndarray:
    """Lower half of the sphere ``S^{n+1}`` of radius ``rho(t)`` centred at height ``center``."""
    rho = radius(RoundSolution(RoundKind.SPHERE, n + 1, rho0), t)
    if rho is None:
        raise ValueError(f"the sphere has collapsed before t={t}")
    r = np.asarray(r, dtype=float)
    if np.any(r >= rho):
        raise ValueError("hemisphere cap evaluated outside its disc")
    return center - np.sqrt(rho**2 - r**2)


def _cap_run(h: float, steps: int, T: float, rho0: float, n: int, frac: float) -> np.ndarray:
    r_in = frac * rho0
    extent = r_in + 2 * h
    grid = make_grid(Mode.RADIAL1D, h, extent, n)
    r = grid.axis(0)
    held = r > r_in + 1e-9 * h
    dt = T / steps
    u = GraphField(grid, hemisphere_cap(r, 0.0, rho0, n))
    for k in range(steps):
        t_next = T if k == steps - 1 else (k + 1) * dt
        u = step(u, dt, held=held, held_values=hemisphere_cap(r, t_next, rho0, n))
    return u.values[~held] - hemisphere_cap(r[~held], T, rho0, n)


def cap_spatial_study(h0: float = 0.02, levels: int = 3, T: float = 0.05, rho0: float = 1.0,
                      n: int = 1, frac: float = 0.5) -> RefinementStudy:
    """Max-norm error of the graph scheme on ``r <= frac * rho0`` at ``T`` for ``h0 / 2^k``.

    Nodes are nested, so the error is compared on the coarse nodes only.
    """
    grid0 = make_grid(Mode.RADIAL1D, h0, frac * rho0 + 2 * h0, n)
    steps0 = _steps(T, cfl_dt(GraphField(grid0, np.zeros(grid0.shape))))
    sizes, errors = [], []
    for k in range(levels):
        h = h0 / 2**k
        err = _cap_run(h, steps0 * 4**k, T, rho0, n, frac)
        errors.append(float(np.max(np.abs(err[:: 2**k]))))
        sizes.append(h)
    return RefinementStudy(tuple(sizes), tuple(errors))


def cap_temporal_study(h: float = 0.01, levels: int = 3, T: float = 0.05, rho0: float = 1.0,
                       n: int = 1, frac: float = 0.5) -> RefinementStudy:
    """Self-convergence in ``dt`` at fixed ``h``: errors are ``|u_dt - u_{dt/2}|``."""
    grid = make_grid(Mode.RADIAL1D, h, frac * rho0 + 2 * h, n)
    steps0 = _steps(T, cfl_dt(GraphField(grid, np.zeros(grid.shape))))
    runs = [_cap_run(h, steps0 * 2**k, T, rho0, n, frac) for k in range(levels + 1)]
    errors = [float(np.max(np.abs(a - b))) for a, b in zip(runs, runs[1:])]
    sizes = [T / (steps0 * 2**k) for k in range(levels)]
    return RefinementStudy(tuple(sizes), tuple(errors))


# ---------------------------------------------------------------------------
# round sphere (level-set scheme)


def sphere_levelset(grid, rho0: float) -> LevelSetField:
    """``(r^2 - rho0^2) / (2 rho0)``: zero on the sphere, unit slope there, smooth on the axis.

    Every level of this function is itself a round sphere, so the exact
    evolution is ``(r^2 + 2 n t - rho0^2) / (2 rho0)`` and no level collapses
    onto the axis before the zero level does.  The truncated signed
    distance instead has a kink on the axis, where the scheme loses its
    order once the inner levels have vanished.
    """
    r = grid.radius()
    w0 = (r**2 - rho0**2) / (2 * rho0)
    if np.max(np.abs(w0)) > 1:
        raise ValueError("grid extent too large: the sphere level-set function leaves [-1, 1]")
    return LevelSetField(grid, w0, 0.0)


def _sphere_radii(h: float, steps: int, T: float, rho0: float, n: int, extent: float,
                  samples: int) -> np.ndarray:
    grid = make_grid(Mode.RADIAL1D, h, extent, n)
    w0 = sphere_levelset(grid, rho0)
    times = T * np.arange(1, samples + 1) / samples
    traj = solve_levelset(LevelSetProblem(w0, T, dt=T / steps), snap_times=times, fattening=False)
    r = grid.axis(0)
    out = []
    for t in times:
        w = traj.nearest(t).values
        i = np.flatnonzero(np.sign(w[:-1]) != np.sign(w[1:]))
        if i.size != 1:
            raise RuntimeError(f"expected one zero crossing at t={t}, found {i.size}")
        out.append(_quadratic_root(r, w, int(i[0])))
    return np.array(out)


def _quadratic_root(r: np.ndarray, w: np.ndarray, i: int) -> float:
    """Root in ``[r_i, r_{i+1}]`` of the parabola through three nodes around the crossing.

    Linear interpolation would add an error ``~ h^2 w_rr`` that depends on
    where the crossing sits between the nodes.
    """
    j = i - 1 if i > 0 and abs(w[i - 1]) < abs(w[i + 2] if i + 2 < len(w) else np.inf) else i
    j = min(max(j, 0), len(w) - 3)
    c = np.polyfit(r[j:j + 3] - r[i], w[j:j + 3], 2)
    roots = np.roots(c)
    h = r[i + 1] - r[i]
    ok = [x.real for x in roots if abs(x.imag) < 1e-12 and -1e-9 * h <= x.real <= h * (1 + 1e-9)]
    if len(ok) != 1:
        return float(zero_crossings((r, w))[0])
    return float(r[i] + ok[0])


def sphere_spatial_study(h0: float = 0.02, levels: int = 3, T: float = 0.05, rho0: float = 0.5,
                         n: int = 2, extent: float = 1.0, samples: int = 20) -> RefinementStudy:
    """Radius error of the level-set scheme for ``h0 / 2^k`` with ``dt`` scaled by 4.

    The error is the largest ``|r(t) - rho(t)|`` over ``samples`` equally
    spaced times up to ``T``.  At a single time the error depends on where
    the crossing falls between two nodes, which differs between the grids.
    """
    sol = RoundSolution(RoundKind.SPHERE, n, rho0)
    if radius(sol, T) is None:
        raise ValueError("the sphere collapses before T")
    exact = np.array([radius(sol, T * k / samples) for k in range(1, samples + 1)])
    steps0 = _steps(T, levelset_cfl(make_grid(Mode.RADIAL1D, h0, extent, n)))
    sizes, errors = [], []
    for k in range(levels):
        h = h0 / 2**k
        r = _sphere_radii(h, steps0 * 4**k, T, rho0, n, extent, samples)
        errors.append(float(np.max(np.abs(r - exact))))
        sizes.append(h)
    return RefinementStudy(tuple(sizes), tuple(errors))


def sphere_temporal_study(h: float = 0.01, levels: int = 3, T: float = 0.05, rho0: float = 0.5,
                          n: int = 2, extent: float = 1.0, samples: int = 20) -> RefinementStudy:
    """Self-convergence of the zero-crossing radius in ``dt`` at fixed ``h``."""
    steps0 = _steps(T, levelset_cfl(make_grid(Mode.RADIAL1D, h, extent, n)))
    radii = [_sphere_radii(h, steps0 * 2**k, T, rho0, n, extent, samples) for k in range(levels + 1)]
    errors = [float(np.max(np.abs(a - b))) for a, b in zip(radii, radii[1:])]
    sizes = [T / (steps0 * 2**k) for k in range(levels)]
    return RefinementStudy(tuple(sizes), tuple(errors))
