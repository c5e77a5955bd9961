"""Cross-checks between the capped graph flow and the level-set flows.

Every check is a post-processor over finished trajectories and returns
plain numbers; :class:`Check` packages a number with its threshold for
reporting.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.spatial import cKDTree

from .fields import Mode, Trajectory, zero_crossings
from .kernels import levelset_step
from .levelset import count_components, levelset_cfl


@dataclass(frozen=True)
class Check:
    name: str
    scenario: str
    worst_value: float | None
    threshold: float | None
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass
class DistanceSeries:
    times: np.ndarray
    distances: np.ndarray

    @property
    def worst(self) -> float:
        return float(np.max(self.distances)) if len(self.distances) else 0.0


# ---------------------------------------------------------------------------
# boundaries and distances


def boundary_points(values: np.ndarray, grid) -> np.ndarray:
    """Points where ``values`` changes sign along grid edges, as an ``(N, d)`` array.

    Radial1D boundaries are returned as radii in a ``(N, 1)`` array.
    """
    vals = np.asarray(values, dtype=float)
    if grid.ndim == 1:
        return np.array(zero_crossings((grid.axis(0), vals))).reshape(-1, 1)
    axes = grid.axes
    mesh = np.stack(grid.mesh(), axis=-1)
    pts = []
    for k in range(grid.ndim):
        a = np.moveaxis(vals, k, 0)
        m = np.moveaxis(mesh, k, 0)
        lo, hi = a[:-1], a[1:]
        cross = ((lo < 0) & (hi >= 0)) | ((lo >= 0) & (hi < 0))
        if not cross.any():
            continue
        s = lo[cross] / (lo[cross] - hi[cross])
        p = m[:-1][cross].copy()
        p[:, k] += s * (axes[k][1] - axes[k][0])
        pts.append(p)
    return np.vstack(pts) if pts else np.empty((0, grid.ndim))


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between point sets; 0 for two empty sets, inf for one."""
    if len(a) == 0 and len(b) == 0:
        return 0.0
    if len(a) == 0 or len(b) == 0:
        return float("inf")
    da, _ = cKDTree(b).query(a)
    db, _ = cKDTree(a).query(b)
    return float(max(da.max(), db.max()))


def _pair_times(ta: Trajectory, tb: Trajectory, tol: float = 1e-9):
    """Index pairs of snapshots with equal times (within ``tol``)."""
    tb_times = tb.times
    pairs = []
    for i, t in enumerate(ta.times):
        j = int(np.argmin(np.abs(tb_times - t)))
        if abs(tb_times[j] - t) <= tol * max(1.0, abs(t)):
            pairs.append((i, j))
    if not pairs:
        raise ValueError("trajectories share no snapshot times")
    return pairs


def _same_spatial_grid(ga, gb):
    if ga.mode != gb.mode or abs(ga.h - gb.h) > 1e-15 or ga.shape != gb.shape:
        raise ValueError("trajectories live on different grids")


def projection_vs_levelset(graph: Trajectory, vtilde: Trajectory, a: float,
                           before_extinction: bool = True) -> DistanceSeries:
    """Hausdorff distance between the boundaries of ``{u < a}`` and ``{vtilde < 0}`` per time.

    With ``before_extinction`` only snapshots where ``{vtilde < 0}`` is
    nonempty are compared.
    """
    _same_spatial_grid(graph.grid, vtilde.grid)
    L = graph.info.get("L")
    if L is not None and a > L - 1:
        raise ValueError(f"level a={a} must not exceed L-1 = {L - 1}")
    times, dists = [], []
    for i, j in _pair_times(graph, vtilde):
        vt = vtilde[j].values
        if before_extinction and not (vt < 0).any():
            continue
        u = graph[i].values
        with np.errstate(invalid="ignore"):
            pa = boundary_points(np.where(np.isfinite(u), u - a, 1.0), graph.grid)
        pb = boundary_points(vt, vtilde.grid)
        times.append(graph[i].time)
        dists.append(hausdorff(pa, pb))
    return DistanceSeries(np.array(times), np.array(dists))


def level_robustness(graph: Trajectory, levels) -> float:
    """Largest Hausdorff distance between the boundaries of ``{u < a}`` for the given levels."""
    levels = list(levels)
    worst = 0.0
    for snap in graph:
        u = snap.values
        sets = []
        for a in levels:
            with np.errstate(invalid="ignore"):
                sets.append(boundary_points(np.where(np.isfinite(u), u - a, 1.0), graph.grid))
        if any(len(s) == 0 for s in sets):
            continue
        for p, q in zip(sets, sets[1:]):
            worst = max(worst, hausdorff(p, q))
    return worst


# ---------------------------------------------------------------------------
# level-set lemmata


def ordering_w_v(w: Trajectory, v: Trajectory, tol: float = 1e-12) -> float:
    """``min (w - v)`` over matching snapshots; raises if violated at the first one."""
    _same_spatial_grid(w.grid, v.grid)
    pairs = _pair_times(w, v)
    i0, j0 = pairs[0]
    first = float(np.min(w[i0].values - v[j0].values))
    if first < -tol:
        raise ValueError(f"initial ordering w >= v violated by {first:.3g}")
    return min(float(np.min(w[i].values - v[j].values)) for i, j in pairs)


def graph_on_zero_level(graph: Trajectory, w: Trajectory, u_max: float | None = None) -> dict:
    """``max |w(r, u(r,t), t)|`` over graph nodes below ``u_max``.

    ``w`` lives on an Axisym2D grid whose physical heights are the grid's
    ``z`` plus ``w.info['z_offset']``.  Graph values are interpolated
    linearly in ``r`` when the two radial grids differ.  Returns the worst
    value, the number of samples and whether samples left the ``w`` window.
    """
    wg = w.grid
    if wg.mode is not Mode.AXISYM2D or graph.grid.mode is not Mode.RADIAL1D:
        raise ValueError("graph_on_zero_level compares a Radial1D graph with an Axisym2D w")
    z_off = float(w.info.get("z_offset", 0.0))
    L = graph.info.get("L")
    if u_max is None:
        u_max = np.inf if L is None else L - 1
    r_w, z_w = wg.axes
    r_g = graph.grid.axis(0)
    worst, samples, truncated = 0.0, 0, False
    for i, j in _pair_times(graph, w):
        u = np.asarray(graph[i].values)
        m = np.isfinite(u) & (u <= u_max) & (r_g <= r_w[-1])
        zq = u[m] - z_off
        inside = (zq >= z_w[0]) & (zq <= z_w[-1])
        truncated |= not inside.all()
        if not inside.any():
            continue
        interp = RegularGridInterpolator((r_w, z_w), np.asarray(w[j].values))
        vals = interp(np.column_stack([r_g[m][inside], zq[inside]]))
        samples += vals.size
        worst = max(worst, float(np.max(np.abs(vals))))
    return {"worst": worst, "samples": samples, "truncated": truncated}


def cylinder_product(v: Trajectory, vtilde: Trajectory) -> float:
    """``max |v(r, z, t) - vtilde(r, t)|`` over matching snapshots."""
    gv, gt = v.grid, vtilde.grid
    if gv.mode is not Mode.AXISYM2D or gt.mode is not Mode.RADIAL1D:
        raise ValueError("cylinder_product compares Axisym2D v with Radial1D vtilde")
    if abs(gv.h - gt.h) > 1e-15 or gv.shape[0] != gt.shape[0]:
        raise ValueError("radial grids differ")
    return max(
        float(np.max(np.abs(v[i].values - vtilde[j].values[:, None])))
        for i, j in _pair_times(v, vtilde)
    )


@dataclass
class MonotoneReport:
    worst_violation: float
    gaps: list
    passed: bool


def monotone_limit(wL: list[Trajectory], w: Trajectory, tol: float = 1e-12) -> MonotoneReport:
    """Check ``w^{L1} <= w^{L2} <= w`` nodewise for increasing caps and shrinking gaps.

    ``wL`` must be ordered by increasing cap; the initial data are checked
    first and a violation there raises.  The gap of ``w^L`` is the largest
    node average of ``w - w^L`` over common snapshot times (the maximum
    itself saturates at 2 once the truncated functions differ by a full
    band somewhere).
    """
    if not wL:
        raise ValueError("need at least one capped trajectory")
    for tr in wL:
        _same_spatial_grid(tr.grid, w.grid)
    chain0 = [tr[0].values for tr in wL] + [w[0].values]
    for lo, hi in zip(chain0, chain0[1:]):
        if np.min(hi - lo) < -tol:
            raise ValueError("initial data are not nondecreasing in L (check the order of wL)")
    worst = 0.0
    for i, j in _pair_times(w, wL[0]):
        t = w[i].time
        chain = []
        for tr in wL:
            k = int(np.argmin(np.abs(tr.times - t)))
            chain.append(tr[k].values)
        chain.append(w[i].values)
        for lo, hi in zip(chain, chain[1:]):
            worst = max(worst, float(np.max(lo - hi)))
    gaps = []
    for tr in wL:
        gaps.append(max(float(np.mean(w[i].values - tr[j].values)) for i, j in _pair_times(w, tr)))
    decreasing = all(b <= a + tol for a, b in zip(gaps, gaps[1:]))
    return MonotoneReport(worst, gaps, worst <= tol and decreasing)


# ---------------------------------------------------------------------------
# vanishing and topology


def graph_vanishing_time(graph: Trajectory, L: float | None = None) -> float | None:
    """First snapshot time at which every node is ESCAPED or ``>= L - 1``."""
    L = graph.info.get("L") if L is None else L
    if L is None:
        raise ValueError("cap L unknown")
    for s in graph:
        with np.errstate(invalid="ignore"):
            if np.all(~np.isfinite(s.values) | (s.values >= L - 1)):
                return float(s.time)
    return None


def levelset_extinction_time(vtilde: Trajectory) -> float | None:
    """First snapshot time at which ``{vtilde < 0}`` is empty."""
    for s in vtilde:
        if not (np.asarray(s.values) < 0).any():
            return float(s.time)
    return None


def vanishing_times(graph: Trajectory, vtilde: Trajectory):
    """``(t_graph, t_levelset)``; ``None`` marks a flow that does not vanish within the horizon."""
    return graph_vanishing_time(graph), levelset_extinction_time(vtilde)


def component_history(traj: Trajectory, region) -> list[tuple[float, int]]:
    """``(time, number of components of region(snapshot))`` for every snapshot."""
    return [(float(s.time), count_components(region(s))) for s in traj]


def first_split_time(history) -> float | None:
    """First time the component count rises from 1 to 2 or more."""
    prev = None
    for t, c in history:
        if prev == 1 and c >= 2:
            return t
        prev = c
    return None


def hole_closing_time(vtilde: Trajectory) -> float | None:
    """First snapshot at which the origin lies in ``{vtilde < 0}`` (radial or Cartesian)."""
    grid = vtilde.grid
    idx = tuple(0 if (grid.is_radial and k == 0) else s // 2 for k, s in enumerate(grid.shape))
    for s in vtilde:
        if s.values[idx] < 0:
            return float(s.time)
    return None


def origin_drop_time(graph: Trajectory, L: float | None = None) -> tuple[float | None, bool]:
    """First time ``u(0, t) < L - 1`` and whether it stays below afterwards."""
    L = graph.info.get("L") if L is None else L
    grid = graph.grid
    idx = tuple(0 if (grid.is_radial and k == 0) else s // 2 for k, s in enumerate(grid.shape))
    vals = np.array([s.values[idx] for s in graph])
    below = np.isfinite(vals) & (vals < L - 1)
    if not below.any():
        return None, False
    first = int(np.argmax(below))
    return float(graph[first].time), bool(below[first:].all())


def inner_boundary_time(traj: Trajectory, level: float = 0.0) -> float | None:
    """First snapshot at which ``values - level`` has fewer than two sign changes (radial grids).

    For an annulus this is when the inner boundary circle has closed up.
    """
    if not traj.grid.is_radial or traj.grid.ndim != 1:
        raise ValueError("inner_boundary_time needs a Radial1D trajectory")
    r = traj.grid.axis(0)
    for s in traj:
        vals = np.where(np.isfinite(s.values), s.values, np.finfo(float).max) - level
        if len(zero_crossings((r, vals))) < 2:
            return float(s.time)
    return None


# ---------------------------------------------------------------------------
# discrete comparison principle


def random_smooth_field(rng: np.random.Generator, grid, modes: int = 4, amplitude: float = 0.5) -> np.ndarray:
    """Sum of a few random Fourier modes on a Cartesian grid, scaled to ``amplitude``."""
    mesh = grid.mesh()
    out = np.zeros(grid.shape)
    for _ in range(modes):
        k = rng.integers(1, 4, size=grid.ndim)
        phase = rng.uniform(0, 2 * np.pi)
        arg = sum(kk * np.pi * x for kk, x in zip(k, mesh)) + phase
        out += rng.normal() * np.cos(arg)
    return amplitude * out / max(np.max(np.abs(out)), 1e-12)


@dataclass(frozen=True)
class ComparisonTrial:
    worst: float
    pairs: int
    steps: int
    per_pair: tuple


def comparison_trials(grid, pairs: int = 100, steps: int = 200, seed: int = 0,
                      delta_reg: float = 1.0) -> ComparisonTrial:
    """Evolve random ordered pairs ``v0 <= w0`` by the level-set scheme; report ``min(w - v)``.

    ``w0`` is a random smooth field and ``v0 = w0 - g`` with ``g >= 0`` a
    random smooth bump field, both clipped to ``[-1, 1]``.
    """
    rng = np.random.default_rng(seed)
    dt = levelset_cfl(grid)
    worst_each = []
    for _ in range(pairs):
        w = np.clip(random_smooth_field(rng, grid, amplitude=0.8), -1, 1)
        g = 0.5 * (random_smooth_field(rng, grid, amplitude=0.3) + 0.3)
        v = np.clip(w - np.maximum(g, 0.0), -1, 1)
        if np.min(w - v) < 0:
            raise AssertionError("constructed pair is not ordered")
        bw, bv = np.empty_like(w), np.empty_like(v)
        worst = 0.0
        for _ in range(steps):
            levelset_step(w, bw, dt, grid, delta_reg)
            levelset_step(v, bv, dt, grid, delta_reg)
            w, bw = bw, w
            v, bv = bv, v
            worst = min(worst, float(np.min(w - v)))
        worst_each.append(worst)
    return ComparisonTrial(float(min(worst_each)), pairs, steps, tuple(worst_each))
