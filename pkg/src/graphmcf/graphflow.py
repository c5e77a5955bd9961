"""Explicit solver for graphical mean curvature flow and the capped approximation.

The capped problem solves ``u_t = v div(Du / v)`` on ``B_R`` with ``u = L``
on the boundary ring and initial datum ``min_eps(u_{0,eps}, L)``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage

from .fields import ESCAPED, GraphField, Mode, Trajectory
from .geometry import mollified_min, mollify_initial
from .stencils import d1, d2, escape_influence, filled
from .kernels import graph_step
from .timeloop import schedule

log = logging.getLogger(__name__)

CFL_SAFETY = 0.4
SCHEMES = ("central", "monotone")


class SchemeInstability(RuntimeError):
    """Raised when a capped run violates the discrete maximum principle."""


def mcf_rhs(u: GraphField, scheme: str = "central") -> np.ndarray:
    """Nondivergence form of ``v div(Du/v)``.

    Radial1D: ``u_rr/(1+u_r^2) + n u_r/r`` with the axis limit
    ``(n+1) u_rr``.  Cartesian: ``Lap u - u_i u_j u_ij/(1+|Du|^2)``.
    All differences are central.  With ``scheme="monotone"`` (Radial1D
    only) the term ``n u_r/r`` uses the forward difference at nodes where
    ``n h / (2r) > 1/(1+u_r^2)``, i.e. where the central weight on the
    inner neighbour would be negative.  This happens on steep walls, where
    the diffusion degenerates; it costs accuracy there but restores the
    discrete maximum principle.
    """
    _check_scheme(scheme, u.grid)
    out = _rhs(filled(u.values), u.grid, scheme == "monotone")
    bad = escape_influence(u.escaped, u.grid)
    if bad.any():
        out = np.where(bad, ESCAPED, out)
    return out


def _check_scheme(scheme: str, grid) -> None:
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if scheme == "monotone" and grid.mode is not Mode.RADIAL1D:
        raise ValueError("the monotone scheme is implemented for Radial1D grids only")


def _rhs(vals: np.ndarray, grid, upwind: bool = False) -> np.ndarray:
    h = grid.h
    if grid.mode is Mode.RADIAL1D:
        n = grid.n
        ur = d1(vals, h, 0, reflect_lo=True)
        urr = d2(vals, h, 0, reflect_lo=True)
        r = grid.axis(0)
        diff = 1.0 / (1.0 + ur**2)
        jump = np.zeros_like(vals)
        jump[:-1] = vals[1:] - vals[:-1]
        with np.errstate(divide="ignore", invalid="ignore"):
            adv = n * ur / r
            if upwind:
                adv = np.where(n * h > 2 * r * diff, n * jump / (h * r), adv)
        out = urr * diff + adv
        out[0] = (n + 1) * urr[0]
        return out
    if grid.mode is Mode.AXISYM2D:
        raise ValueError("graph flow runs on Radial1D or Cartesian grids")
    d = grid.ndim
    grad = [d1(vals, h, k) for k in range(d)]
    lap = sum(d2(vals, h, k) for k in range(d))
    q = sum(grad[k] ** 2 * d2(vals, h, k) for k in range(d))
    for k in range(d):
        for l in range(k + 1, d):
            q = q + 2 * grad[k] * grad[l] * d1(grad[k], h, l)
    return lap - q / (1.0 + sum(g**2 for g in grad))


def divergence_rhs(u: GraphField) -> np.ndarray:
    """Divergence-form discretization ``v * div(Du/v)`` on Cartesian grids.

    Fluxes ``Du/v`` live on cell faces; used to cross-check :func:`mcf_rhs`.
    """
    grid = u.grid
    if grid.mode in (Mode.RADIAL1D, Mode.AXISYM2D):
        raise ValueError("divergence form is provided for Cartesian grids")
    vals = filled(u.values)
    h = grid.h
    d = grid.ndim
    grad_c = [d1(vals, h, k) for k in range(d)]
    div = np.zeros_like(vals)
    for k in range(d):
        a = np.moveaxis(vals, k, 0)
        dk = (a[1:] - a[:-1]) / h
        tang = []
        for l in range(d):
            if l == k:
                continue
            g = np.moveaxis(grad_c[l], k, 0)
            tang.append(0.5 * (g[1:] + g[:-1]))
        vf = np.sqrt(1.0 + dk**2 + sum(t**2 for t in tang))
        flux = dk / vf
        dv = np.zeros_like(a)
        dv[1:-1] = (flux[1:] - flux[:-1]) / h
        div += np.moveaxis(dv, 0, k)
    v = np.sqrt(1.0 + sum(g**2 for g in grad_c))
    return v * div


def _effective_dims(grid) -> int:
    extra = grid.n - 1 if grid.is_radial else 0
    return grid.ndim + extra


def cfl_dt(u: GraphField) -> float:
    """``0.4 h^2 / (2 d)`` with ``d`` the grid dimension.

    Radial grids with ``n > 1`` count the ``n - 1`` extra rotated directions
    that load the axis node.
    """
    if not np.isfinite(u.values).any():
        raise ValueError("all nodes are ESCAPED; no time step is defined")
    return CFL_SAFETY * u.grid.h**2 / (2 * _effective_dims(u.grid))


def step(
    u: GraphField,
    dt: float,
    L: float | None = None,
    held: np.ndarray | None = None,
    held_values: np.ndarray | float | None = None,
    scheme: str = "central",
) -> GraphField:
    """One forward-Euler step.

    Nodes in ``held`` keep the Dirichlet value (``held_values`` or ``L``);
    with a cap ``L`` every node is clamped to ``<= L`` afterwards.
    """
    limit = cfl_dt(u)
    if dt > limit * (1 + 1e-9):
        raise ValueError(f"dt={dt} exceeds the stability limit {limit}")
    rhs = mcf_rhs(u, scheme)
    with np.errstate(invalid="ignore"):
        new = u.values + dt * rhs
    new = np.where(np.isfinite(rhs) & np.isfinite(u.values), new, ESCAPED)
    if held is not None:
        new = np.where(held, L if held_values is None else held_values, new)
    if L is not None:
        new = np.minimum(new, L)
    return u.with_values(new, u.time + dt)


def ball_mask(grid, R: float) -> np.ndarray:
    """Nodes strictly inside ``B_R`` (tolerance of 1e-9 h)."""
    return grid.radius() < R - 1e-9 * grid.h


@dataclass
class CappedProblem:
    """Dirichlet approximation with cap ``L`` on ``B_R`` and mollification ``eps``."""

    u0: GraphField
    L: float
    eps: float
    R: float
    T: float
    dt: float | None = None
    scheme: str = "central"

    def __post_init__(self):
        if not 0 < self.eps <= 1:
            raise ValueError(f"eps must lie in (0, 1], got {self.eps}")
        if not self.T > 0:
            raise ValueError("T must be positive")
        grid = self.u0.grid
        if grid.mode is Mode.AXISYM2D:
            raise ValueError("capped graph problems run on Radial1D or Cartesian grids")
        _check_scheme(self.scheme, grid)
        rmax = grid.extents[0] if grid.mode is Mode.RADIAL1D else min(grid.extents)
        if self.R > rmax + 1e-12:
            raise ValueError(f"R={self.R} exceeds the grid extent {rmax}")
        inside = self.interior
        if not inside.any():
            raise ValueError("B_R contains no grid nodes")
        ring = ~inside & ndimage.binary_dilation(inside, np.ones((3,) * grid.ndim, bool))
        ue = self.mollified.values
        low = ring & np.isfinite(ue) & (ue < self.L + 1)
        if low.any():
            raise ValueError(
                f"R={self.R} is too small: mollified datum drops to "
                f"{ue[low].min():.6g} < L+1 = {self.L + 1} on the boundary ring"
            )
        if self.dt is not None and self.dt > cfl_dt(self.u0) * (1 + 1e-9):
            raise ValueError(f"fixed dt={self.dt} exceeds the stability limit {cfl_dt(self.u0)}")

    @cached_property
    def interior(self) -> np.ndarray:
        return ball_mask(self.u0.grid, self.R)

    @property
    def held(self) -> np.ndarray:
        return ~self.interior

    @cached_property
    def mollified(self) -> GraphField:
        return mollify_initial(self.u0, self.eps, fill=self.L)

    def initial_field(self) -> GraphField:
        vals = mollified_min(self.mollified.values, self.L, self.eps)
        vals = np.where(self.held, self.L, vals)
        return GraphField(self.u0.grid, vals, 0.0)


def solve_capped(
    p: CappedProblem,
    snap_every: int | None = None,
    monitors: bool = True,
    a: float | None = None,
    snap_times: Sequence[float] | None = None,
    probes=None,
) -> Trajectory:
    """Run the capped problem to time ``p.T`` and record snapshots.

    Snapshots are stored at ``t = 0``, every ``snap_every`` steps (or exactly
    at ``snap_times``) and at ``T``.  Monitor records (see
    :mod:`graphmcf.monitors`) are attached per snapshot with level ``a``
    (default ``L - 5``).  ``probes`` (a flat index array or boolean mask)
    selects nodes whose values are recorded after every step in
    ``traj.info['probe_times']`` and ``traj.info['probe_values']``.
    """
    if snap_times is None and (snap_every is None or snap_every < 1):
        raise ValueError("snap_every must be >= 1")
    u = p.initial_field()
    grid = u.grid
    traj = Trajectory()
    traj.info.update(kind="graph", L=p.L, eps=p.eps, R=p.R, T=p.T, scheme=p.scheme)
    traj.append(u)
    vals = np.array(u.values)
    held = p.held
    if np.all(vals >= p.L - 1):
        warnings.warn("initial datum is everywhere >= L-1; returning the constant-L trajectory")
        vals = np.full_like(vals, p.L)
        traj.snapshots[0] = GraphField(grid, vals, 0.0)
        for t in (snap_times if snap_times is not None else []):
            if 0 < t < p.T:
                traj.append(GraphField(grid, vals, float(t)))
        traj.append(GraphField(grid, vals, p.T))
        traj.info["degenerate"] = True
        if monitors:
            _attach_monitors(traj, p, a)
        return traj
    dt_full = p.dt if p.dt is not None else cfl_dt(u)
    floor = float(vals.min()) - 1.0
    if not _edges_held(held):
        raise ValueError("B_R must not reach the grid edge")
    buf = np.empty_like(vals)
    probe_idx = _probe_index(probes)
    series_t, series_u = [0.0], []
    if probe_idx is not None:
        series_u.append(vals.ravel()[probe_idx].copy())
    k = 0
    for dt, t, snap in schedule(p.T, dt_full, snap_every, snap_times):
        graph_step(vals, buf, dt, grid, float(p.L), held, p.scheme == "monotone")
        vals, buf = buf, vals
        k += 1
        if probe_idx is not None:
            series_t.append(t)
            series_u.append(vals.ravel()[probe_idx].copy())
        if k % 200 == 0 or snap:
            lo = vals.min()
            if not np.isfinite(lo) or lo < floor:
                raise SchemeInstability(
                    f"maximum principle violated at t={t:.6g}: min u = {lo:.6g} < {floor:.6g}"
                )
        if snap:
            traj.append(GraphField(grid, vals, t, u.lower_bound))
    traj.info["steps"] = k
    traj.info["dt"] = dt_full
    if probe_idx is not None:
        traj.info["probe_index"] = probe_idx
        traj.info["probe_times"] = np.array(series_t)
        traj.info["probe_values"] = np.array(series_u)
    if monitors:
        _attach_monitors(traj, p, a)
    return traj


def _probe_index(probes):
    if probes is None:
        return None
    probes = np.asarray(probes)
    return np.flatnonzero(probes.ravel()) if probes.dtype == bool else probes.ravel()


def _edges_held(held: np.ndarray) -> bool:
    # the compiled update skips one-sided edge stencils, so edges must be Dirichlet nodes
    for k in range(held.ndim):
        edge = np.take(held, [-1], axis=k)
        if not edge.all():
            return False
        if k > 0 and not np.take(held, [0], axis=k).all():
            return False
    if held.ndim > 1 and not np.take(held, [0], axis=0).all():
        return False
    return True


def _attach_monitors(traj: Trajectory, p: CappedProblem, a: float | None) -> None:
    from .monitors import record_monitors

    traj.monitors = record_monitors(traj, a=p.L - 5 if a is None else a)


@dataclass
class SweepResult:
    Ls: list
    trajectories: list
    max_diffs: list = field(default_factory=list)

    def probe(self, x_index, t: float) -> list[float]:
        """Values of each capped solution at node ``x_index`` and the snapshot nearest ``t``."""
        return [float(tr.nearest(t).values[x_index]) for tr in self.trajectories]


def cap_sweep(
    u0: GraphField,
    Ls: Sequence[float],
    eps: float,
    R_of_L: Callable[[float], float],
    T: float,
    snap_every: int | None = 100,
    snap_times: Sequence[float] | None = None,
    scheme: str = "central",
) -> SweepResult:
    """Solve the capped problem for increasing caps and report successive differences.

    ``max_diffs[i]`` is the largest ``|u^{L_{i+1}} - u^{L_i}|`` over common
    snapshot times and nodes where both values lie below ``min(Ls) - 1``.
    """
    Ls = list(Ls)
    if any(b <= a for a, b in zip(Ls, Ls[1:])):
        raise ValueError("Ls must be strictly increasing")
    trajs = [
        solve_capped(
            CappedProblem(u0, L, eps, R_of_L(L), T, scheme=scheme), snap_every, monitors=False, snap_times=snap_times
        )
        for L in Ls
    ]
    res = SweepResult(Ls, trajs)
    thresh = min(Ls) - 1
    for ta, tb in zip(trajs, trajs[1:]):
        worst = 0.0
        for sa in ta:
            sb = tb.nearest(sa.time)
            if abs(sb.time - sa.time) > 1e-12:
                continue
            m = (sa.values < thresh) & (sb.values < thresh)
            if m.any():
                worst = max(worst, float(np.abs(sa.values[m] - sb.values[m]).max()))
        res.max_diffs.append(worst)
    return res


def domain_projection(u: GraphField, a: float, L: float | None = None) -> np.ndarray:
    """Indicator of ``{u < a}``, the discrete proxy of the projected domain."""
    if L is not None and a > L - 1:
        raise ValueError(f"level a={a} must not exceed L-1 = {L - 1}")
    with np.errstate(invalid="ignore"):
        return np.isfinite(u.values) & (u.values < a)
