"""Run orchestration: solve a scenario, evaluate its checks, write and reload run directories.

A run directory holds

* ``config.json``: the resolved scenario configuration,
* ``<name>_NNNNN.txt`` snapshot files and ``<name>_info.json`` for each
  trajectory (``graph``, ``vtilde`` and, for radial scenarios, ``w``, ``v``
  and ``vtilde_w``),
* ``monitors.csv``: one monitor row per graph snapshot,
* ``checks.ndjson``: one record per evaluated check,
* ``svg/``: contour plots at a few snapshot times.

The tall level-set fields ``w``, ``v`` and ``vtilde_w`` are written at
every ``stride``-th snapshot only; all checks run on the full in-memory
trajectories.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import compare as C
from . import io
from . import monitors as Mo
from .fields import Mode, Trajectory
from .graphflow import solve_capped
from .levelset import Verdict, solve_levelset
from .scenarios import Scenario, ScenarioConfig, build_scenario

log = logging.getLogger(__name__)

TRAJECTORIES = ("graph", "vtilde", "w", "v", "vtilde_w")
TALL = ("w", "v", "vtilde_w")
CHECK_NAMES = (
    "c1_monotone",
    "gradient_bound",
    "c2_envelope",
    "holder",
    "fattening",
    "vanishing",
    "projection",
    "level_robustness",
    "hole_closing",
    "origin_drop",
    "neck_split",
    "ordering_w_v",
    "graph_on_zero_level",
    "cylinder_product",
)
MAX_WRITTEN = 12
SVG_FRAMES = 4


def thread_budget() -> int:
    """Worker threads for independent sub-runs: ``MCF_THREADS`` if set, else 1."""
    raw = os.environ.get("MCF_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"MCF_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"MCF_THREADS must be a positive integer, got {raw!r}")
    return n


def parse_checks(spec: str | list | None) -> tuple[str, ...]:
    """``all``, ``none`` or a comma-separated subset of :data:`CHECK_NAMES`."""
    if spec is None:
        return CHECK_NAMES
    items = spec if isinstance(spec, list) else [s.strip() for s in spec.split(",") if s.strip()]
    if items == ["all"]:
        return CHECK_NAMES
    if items == ["none"] or not items:
        return ()
    unknown = [s for s in items if s not in CHECK_NAMES]
    if unknown:
        raise ValueError(f"unknown checks {unknown}; available: {', '.join(CHECK_NAMES)}")
    return tuple(s for s in CHECK_NAMES if s in items)


def default_probes(scen: Scenario) -> np.ndarray:
    """Flat node indices whose values are recorded after every step.

    About a dozen nodes where ``u0`` is finite: evenly spaced radii on
    radial grids, the centre line along the first axis on Cartesian grids.
    """
    u0 = scen.graph.u0
    grid = u0.grid
    finite = np.isfinite(u0.values)
    if grid.mode is Mode.RADIAL1D:
        idx = np.flatnonzero(finite)
    else:
        line = tuple(slice(None) if k == 0 else s // 2 for k, s in enumerate(grid.shape))
        flat = np.arange(finite.size).reshape(grid.shape)[line]
        idx = flat[finite[line]]
    if idx.size == 0:
        return idx
    pick = np.unique(np.linspace(0, idx.size - 1, min(12, idx.size)).round().astype(int))
    return idx[pick]


# ---------------------------------------------------------------------------
# solving


@dataclass
class RunResult:
    cfg: ScenarioConfig
    trajectories: dict
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]


def solve_scenario(scen: Scenario, threads: int = 1) -> dict:
    """All trajectories of a scenario, sub-runs spread over ``threads`` workers."""
    times = scen.snap_times
    jobs = {
        "graph": lambda: solve_capped(scen.graph, snap_times=times, probes=default_probes(scen)),
        "vtilde": lambda: solve_levelset(scen.vtilde, snap_times=times),
    }
    if scen.w is not None:
        jobs["w"] = lambda: solve_levelset(scen.w, snap_times=times, fattening=False)
        jobs["v"] = lambda: solve_levelset(scen.v, snap_times=times, fattening=False)
        jobs["vtilde_w"] = lambda: solve_levelset(scen.vtilde_w, snap_times=times, fattening=False)
    if threads <= 1:
        return {k: f() for k, f in jobs.items()}
    with ThreadPoolExecutor(max_workers=min(threads, len(jobs))) as pool:
        futures = {k: pool.submit(f) for k, f in jobs.items()}
        return {k: fut.result() for k, fut in futures.items()}


def run_scenario(cfg: ScenarioConfig, checks=None, threads: int | None = None) -> RunResult:
    """Build, solve and check one scenario."""
    scen = build_scenario(cfg)
    trajs = solve_scenario(scen, thread_budget() if threads is None else threads)
    return RunResult(cfg, trajs, evaluate_checks(cfg, trajs, parse_checks(checks)))


# ---------------------------------------------------------------------------
# checks


def _check(name, cfg, worst, threshold, passed, **detail) -> C.Check:
    return C.Check(name, cfg.name, worst, threshold, bool(passed), detail)


def evaluate_checks(cfg: ScenarioConfig, trajs: dict, selected=CHECK_NAMES) -> list[C.Check]:
    """Every selected check that applies to the scenario, in :data:`CHECK_NAMES` order."""
    g, vt = trajs["graph"], trajs["vtilde"]
    a = float(g.info["L"]) - 5
    h = cfg.h
    snap = cfg.snap_dt
    dom = cfg.domain.type
    out = []
    want = set(selected)

    if "c1_monotone" in want and g.monitors:
        ok, ratio = Mo.c1_nonincreasing(g.monitors)
        out.append(_check("c1_monotone", cfg, ratio, 1.01, ok, a=a))
    if "gradient_bound" in want and g.monitors:
        ok, ratio = Mo.gradient_bound_holds(g.monitors)
        out.append(_check("gradient_bound", cfg, ratio, 1.0, ok, a=a))
    if "c2_envelope" in want and g.monitors:
        try:
            base, slope = Mo.c2_envelope(g.monitors)
            out.append(_check("c2_envelope", cfg, slope, None, np.isfinite(slope), c2_initial=base))
        except ValueError as e:
            out.append(_check("c2_envelope", cfg, None, None, False, error=str(e)))
    if "holder" in want:
        hr = Mo.holder_check(g, a=a)
        out.append(_check("holder", cfg, hr.worst, hr.bound * (1 + Mo.HOLDER_SLACK), hr.passed,
                          pairs=hr.pairs, M=hr.M))
    t_ext = C.levelset_extinction_time(vt)
    fat = [r.time for r in vt.monitors
           if r.verdict is Verdict.SUSPICIOUS and (t_ext is None or r.time < t_ext)]
    if "fattening" in want and vt.monitors:
        # heuristic only: reported, and it demotes the boundary comparison below
        out.append(_check("fattening", cfg, len(fat), 0, True, suspicious_times=fat, reported_only=True))
    if "vanishing" in want:
        tg, tl = C.vanishing_times(g, vt)
        if tg is None and tl is None:
            log.info("%s: neither flow vanishes before T=%g; vanishing check skipped", cfg.name, cfg.T)
        else:
            tol = 2 * snap + 0.1 * (tl if tl is not None else tg)
            worst = abs(tg - tl) if tg is not None and tl is not None else None
            ok = worst is not None and worst <= tol + 1e-12
            out.append(_check("vanishing", cfg, worst, tol, ok, t_graph=tg, t_levelset=tl))
    if dom == "Ball":
        if "projection" in want:
            # snapshots with a Suspicious fattening verdict are reported but not judged
            ds = C.projection_vs_levelset(g, vt, a)
            judged = np.array([not np.any(np.isclose(t, fat, rtol=0, atol=1e-9)) for t in ds.times], dtype=bool)
            worst = float(ds.distances[judged].max()) if judged.any() else 0.0
            out.append(_check("projection", cfg, worst, 5 * h, worst <= 5 * h,
                              worst_all_times=ds.worst, demoted_times=[float(t) for t in ds.times[~judged]]))
        if "level_robustness" in want:
            d = C.level_robustness(g, [a - 5, a])
            out.append(_check("level_robustness", cfg, d, None, True, levels=[a - 5, a], reported_only=True))
    if dom == "Annulus":
        t_v = C.inner_boundary_time(vt)
        if "hole_closing" in want:
            t_g = C.inner_boundary_time(g, a)
            ok = t_g is not None and t_v is not None and abs(t_g - t_v) <= 3 * snap + 1e-12
            worst = abs(t_g - t_v) if t_g is not None and t_v is not None else None
            out.append(_check("hole_closing", cfg, worst, 3 * snap, ok, t_graph=t_g, t_levelset=t_v))
        if "origin_drop" in want:
            t_drop, stays = C.origin_drop_time(g)
            if t_v is None:
                out.append(_check("origin_drop", cfg, None, None, False, error="hole does not close before T"))
            else:
                late = None if t_drop is None else t_drop - t_v
                finite = all(np.isfinite(s.values[0]) for s in g)
                ok = late is not None and late <= 0.1 * t_v + 1e-12 and stays and finite
                out.append(_check("origin_drop", cfg, late, 0.1 * t_v, ok, t_hole=t_v, t_drop=t_drop,
                                  stays_below=stays))
    if dom == "Dumbbell" and "neck_split" in want:
        t_v = C.first_split_time(C.component_history(vt, lambda s: s.values < 0))
        t_g = C.first_split_time(C.component_history(g, lambda s: s.values < a))
        ok = t_g is not None and t_v is not None and abs(t_g - t_v) <= 3 * snap + 1e-12
        worst = abs(t_g - t_v) if t_g is not None and t_v is not None else None
        out.append(_check("neck_split", cfg, worst, 3 * snap, ok, t_graph=t_g, t_levelset=t_v))
    if "w" in trajs:
        w, v, vtw = trajs["w"], trajs["v"], trajs["vtilde_w"]
        if "ordering_w_v" in want:
            m = C.ordering_w_v(w, v)
            out.append(_check("ordering_w_v", cfg, m, -1e-12, m >= -1e-12, direction="min"))
        if "graph_on_zero_level" in want:
            res = C.graph_on_zero_level(g, w)
            out.append(_check("graph_on_zero_level", cfg, res["worst"], 3 * h, res["worst"] <= 3 * h,
                              samples=res["samples"], truncated=res["truncated"]))
        if "cylinder_product" in want:
            d = C.cylinder_product(v, vtw)
            out.append(_check("cylinder_product", cfg, d, 1e-10, d <= 1e-10))
    return out


# ---------------------------------------------------------------------------
# run directories


def _subsample(traj: Trajectory, limit: int) -> Trajectory:
    if len(traj) <= limit:
        return traj
    keep = np.unique(np.linspace(0, len(traj) - 1, limit).round().astype(int))
    sub = Trajectory()
    for i in keep:
        sub.append(traj[i])
    sub.info.update(traj.info)
    return sub


def svg_times(traj: Trajectory, frames: int = SVG_FRAMES) -> list[float]:
    t = traj.times
    return [float(t[i]) for i in np.unique(np.linspace(0, len(t) - 1, frames).round().astype(int))]


def write_run(result: RunResult, out) -> Path:
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    cfg = result.cfg
    (d / "config.json").write_text(json.dumps(cfg.to_dict(), indent=1, sort_keys=True) + "\n")
    sinks = set(cfg.outputs)
    if "snapshots" in sinks:
        for name, traj in result.trajectories.items():
            io.write_trajectory(_subsample(traj, MAX_WRITTEN) if name in TALL else traj, d, name)
    if "csv" in sinks and result.trajectories["graph"].monitors:
        io.write_monitor_csv(result.trajectories["graph"].monitors, d / "monitors.csv")
    if "ndjson" in sinks:
        io.write_ndjson(result.checks, d / "checks.ndjson")
    if "svg" in sinks:
        render_run(result.trajectories, d / "svg", svg_times(result.trajectories["graph"]), cfg.L)
    return d


def render_run(trajs: dict, directory, times, L: float | None = None) -> list[Path]:
    """SVG frames of the graph (profile or ``{u < L - 5}``) and of ``vtilde``."""
    paths = []
    if "graph" in trajs:
        g = trajs["graph"]
        L = g.info.get("L", L)
        level = None if L is None else float(L) - 5
        paths += io.emit_svg_contours(g, times, directory, "graph", level=level, cap=level)
    if "vtilde" in trajs:
        paths += io.emit_svg_contours(trajs["vtilde"], times, directory, "vtilde")
    return paths


def load_run(directory) -> tuple[dict, dict]:
    """``(config dict, {name: Trajectory})`` for every trajectory present in a run directory."""
    d = Path(directory)
    if not d.is_dir():
        raise FileNotFoundError(f"run directory {d} does not exist")
    cfg_path = d / "config.json"
    cfg = json.loads(cfg_path.read_text()) if cfg_path.exists() else {}
    trajs = {}
    for name in TRAJECTORIES:
        if (d / f"{name}_00000.txt").exists():
            trajs[name] = io.read_trajectory(d, name)
    if not trajs:
        raise FileNotFoundError(f"no trajectories in {d}")
    return cfg, trajs


def compare_runs(trajs_a: dict, trajs_b: dict, scenario: str = "") -> list[C.Check]:
    """Boundary distances between matching trajectories of two runs.

    For every trajectory present in both runs the boundary (``{u < L - 5}``
    for graphs, ``{w < 0}`` for level sets) is compared at the common
    snapshot times.  The threshold is five cells of the coarser grid.
    """
    out = []
    for name in TRAJECTORIES:
        if name not in trajs_a or name not in trajs_b:
            continue
        ta, tb = trajs_a[name], trajs_b[name]
        h = max(ta.grid.h, tb.grid.h)
        if ta.grid.mode is not tb.grid.mode:
            out.append(C.Check(f"boundary_{name}", scenario, None, None, False,
                               {"error": f"modes differ: {ta.grid.mode.value} vs {tb.grid.mode.value}"}))
            continue
        la = float(ta.info["L"]) - 5 if "L" in ta.info else 0.0
        lb = float(tb.info["L"]) - 5 if "L" in tb.info else 0.0
        worst, times = 0.0, 0
        for sa in ta:
            sb = tb.nearest(sa.time)
            if abs(sb.time - sa.time) > 1e-9 * max(1.0, sa.time):
                continue
            pa = C.boundary_points(_shifted(sa.values, la), ta.grid)
            pb = C.boundary_points(_shifted(sb.values, lb), tb.grid)
            worst = max(worst, C.hausdorff(pa, pb))
            times += 1
        ok = times > 0 and worst <= 5 * h
        out.append(C.Check(f"boundary_{name}", scenario, worst, 5 * h, ok, {"common_times": times}))
    return out


def _shifted(vals, level):
    vals = np.asarray(vals, dtype=float)
    return np.where(np.isfinite(vals), vals - level, 1.0)
