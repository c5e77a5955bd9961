"""Serialization: snapshot files, monitor CSV, NDJSON check reports and SVG contour plots.

Snapshot files are UTF-8 text: ``key=value`` header lines followed by the
node values in row-major order, one per line with 17 significant digits
(``inf`` for ESCAPED).  Everything written here is deterministic.
"""

from __future__ import annotations

import json
import logging
import math
from pathlib import Path

import numpy as np
from skimage import measure

from .fields import GraphField, Label, LevelSetField, Mode, Trajectory, make_grid, zero_crossings

log = logging.getLogger(__name__)

CSV_HEADER = "time,c1,c2,holder_worst,grad_bound,a,k,lambda,M"


def _num(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


# ---------------------------------------------------------------------------
# snapshots


def write_snapshot(snap, path) -> None:
    g = snap.grid
    lines = [
        f"mode={g.mode.value}",
        f"h={_num(g.h)}",
        f"extent={','.join(_num(e) for e in g.extents) if isinstance(g.extent, tuple) else _num(g.extent)}",
        f"n={g.n}",
        f"time={_num(snap.time)}",
        "sentinel=inf",
    ]
    if isinstance(snap, LevelSetField):
        lines.append(f"label={snap.label.value}")
    lines.extend(_num(x) for x in np.asarray(snap.values).ravel(order="C"))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_snapshot(path):
    """Inverse of :func:`write_snapshot`; returns a GraphField or LevelSetField."""
    text = Path(path).read_text(encoding="utf-8").splitlines()
    header = {}
    i = 0
    while i < len(text) and "=" in text[i]:
        k, v = text[i].split("=", 1)
        header[k] = v
        i += 1
    for key in ("mode", "h", "extent", "n", "time", "sentinel"):
        if key not in header:
            raise ValueError(f"{path}: missing header line {key}=")
    ext = [float(e) for e in header["extent"].split(",")]
    grid = make_grid(header["mode"], float(header["h"]), ext[0] if len(ext) == 1 else ext, int(header["n"]))
    vals = np.array([float(x) for x in text[i:]], dtype=float)
    if vals.size != int(np.prod(grid.shape)):
        raise ValueError(f"{path}: expected {int(np.prod(grid.shape))} values, found {vals.size}")
    vals = vals.reshape(grid.shape)
    t = float(header["time"])
    if "label" in header:
        return LevelSetField(grid, vals, t, Label(header["label"]))
    return GraphField(grid, vals, t)


def write_trajectory(traj: Trajectory, directory, prefix: str) -> list[Path]:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, snap in enumerate(traj):
        p = d / f"{prefix}_{i:05d}.txt"
        write_snapshot(snap, p)
        paths.append(p)
    meta = {k: v for k, v in traj.info.items() if isinstance(v, (int, float, str, bool))}
    (d / f"{prefix}_info.json").write_text(json.dumps(meta, sort_keys=True, indent=1) + "\n")
    return paths


def read_trajectory(directory, prefix: str) -> Trajectory:
    d = Path(directory)
    files = sorted(d.glob(f"{prefix}_[0-9][0-9][0-9][0-9][0-9].txt"))
    if not files:
        raise FileNotFoundError(f"no snapshots {prefix}_*.txt in {d}")
    traj = Trajectory()
    for f in files:
        traj.append(read_snapshot(f))
    info = d / f"{prefix}_info.json"
    if info.exists():
        traj.info.update(json.loads(info.read_text()))
    return traj


# ---------------------------------------------------------------------------
# monitors and reports


def write_monitor_csv(records, path) -> None:
    rows = [CSV_HEADER]
    for r in records:
        rows.append(",".join(_num(x) for x in (
            r.time, r.c1_value, r.c2_value, r.holder_worst, r.grad_bound,
            r.a_used, r.k_used, r.lambda_used, r.M_used,
        )))
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def read_monitor_csv(path) -> list[dict]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    keys = lines[0].split(",")
    return [
        {k: (float(v) if v != "" else None) for k, v in zip(keys, line.split(","))}
        for line in lines[1:]
    ]


def _json_value(x):
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, dict):
        return {k: _json_value(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_json_value(v) for v in x]
    return x


def check_record(check) -> dict:
    return {
        "name": check.name,
        "scenario": check.scenario,
        "worst_value": _json_value(check.worst_value),
        "threshold": _json_value(check.threshold),
        "pass": bool(check.passed),
        "detail": _json_value(check.detail),
    }


def write_ndjson(checks, path) -> None:
    lines = [json.dumps(check_record(c), sort_keys=True) for c in checks]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def read_ndjson(path) -> list[dict]:
    return [json.loads(line) for line in Path(path).read_text(encoding="utf-8").splitlines() if line]


# ---------------------------------------------------------------------------
# SVG


def _fmt(x: float) -> str:
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


def _plane_section(snap):
    """2D array, its two axes and axis names for plotting."""
    g = snap.grid
    vals = np.asarray(snap.values, dtype=float)
    if g.mode is Mode.CARTESIAN3D:
        vals = vals[:, :, g.shape[2] // 2]
        return vals, g.axis(0), g.axis(1)
    if g.mode is Mode.AXISYM2D:
        r = g.axis(0)
        full = np.concatenate([vals[:0:-1], vals], axis=0)
        return full, np.concatenate([-r[:0:-1], r]), g.axis(1)
    return vals, g.axis(0), g.axis(1)


def _contour_paths(vals, xs, ys, level=0.0):
    paths = []
    if not (np.nanmin(vals) < level < np.nanmax(vals)):
        return paths
    for c in measure.find_contours(vals, level):
        px = np.interp(c[:, 0], np.arange(len(xs)), xs)
        py = np.interp(c[:, 1], np.arange(len(ys)), ys)
        paths.append(np.column_stack([px, py]))
    return paths


def svg_document(polylines, circles, box, title: str) -> str:
    """``box = (xmin, xmax, ymin, ymax)``; y is flipped so that it points up."""
    xmin, xmax, ymin, ymax = box
    w, h = xmax - xmin, ymax - ymin
    stroke = _fmt(max(w, h) / 400)
    out = [
        '<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="{_fmt(xmin)} {_fmt(-ymax)} {_fmt(w)} {_fmt(h)}">',
        f"<title>{title}</title>",
        f'<g fill="none" stroke="#888888" stroke-width="{stroke}">',
        f'<line x1="{_fmt(xmin)}" y1="0.000000" x2="{_fmt(xmax)}" y2="0.000000"/>',
        f'<line x1="0.000000" y1="{_fmt(-ymax)}" x2="0.000000" y2="{_fmt(-ymin)}"/>',
        "</g>",
        f'<g fill="none" stroke="#000000" stroke-width="{stroke}">',
    ]
    for pl in polylines:
        pts = " ".join(f"{_fmt(x)},{_fmt(-y)}" for x, y in pl)
        out.append(f'<polyline points="{pts}"/>')
    for cx, cy, r in circles:
        out.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(-cy)}" r="{_fmt(r)}"/>')
    out += ["</g>", "</svg>"]
    return "\n".join(out) + "\n"


def snapshot_svg(snap, level: float | None = None, cap: float | None = None, title: str = "") -> str:
    """SVG of one snapshot.

    Level sets: the zero contour (circles for Radial1D).  Graphs: the
    profile ``u(r)`` for Radial1D (clipped at ``cap``), otherwise the
    boundary of ``{u < level}``.
    """
    g = snap.grid
    title = title or f"t={_fmt(snap.time)}"
    if isinstance(snap, LevelSetField):
        if g.mode is Mode.RADIAL1D:
            R = g.extents[0]
            circles = [(0.0, 0.0, r) for r in zero_crossings(snap)]
            return svg_document([], circles, (-R, R, -R, R), title)
        vals, xs, ys = _plane_section(snap)
        return svg_document(_contour_paths(vals, xs, ys), [], (xs[0], xs[-1], ys[0], ys[-1]), title)
    vals = np.asarray(snap.values, dtype=float)
    if g.mode is Mode.RADIAL1D:
        r = g.axis(0)
        top = cap if cap is not None else np.nanmax(np.where(np.isfinite(vals), vals, np.nan))
        m = np.isfinite(vals) & (vals <= top)
        pts = np.column_stack([np.concatenate([-r[m][::-1], r[m]]), np.concatenate([vals[m][::-1], vals[m]])])
        lo = float(np.min(vals[m])) if m.any() else 0.0
        return svg_document([pts], [], (-r[-1], r[-1], min(lo, 0.0), max(top, 1.0)), title)
    level = 0.0 if level is None else level
    with np.errstate(invalid="ignore"):
        shifted = np.where(np.isfinite(vals), vals - level, 1.0)
    field2 = LevelSetField(g, np.clip(shifted, -1, 1), snap.time)
    sec, xs, ys = _plane_section(field2)
    return svg_document(_contour_paths(sec, xs, ys), [], (xs[0], xs[-1], ys[0], ys[-1]), title)


def emit_svg_contours(traj: Trajectory, times, directory, prefix: str, level=None, cap=None) -> list[Path]:
    """One SVG per requested time (nearest snapshot, with a warning when not exact)."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    out = []
    for i, t in enumerate(times):
        snap = traj.nearest(t)
        if abs(snap.time - t) > 1e-9 * max(1.0, abs(t)):
            log.warning("time %g not in trajectory; using nearest snapshot t=%g", t, snap.time)
        p = d / f"{prefix}_{i:03d}.svg"
        p.write_text(snapshot_svg(snap, level, cap), encoding="utf-8")
        out.append(p)
    return out
