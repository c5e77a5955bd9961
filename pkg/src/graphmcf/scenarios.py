"""Scenario configuration and construction of the graph and level-set problems.

A scenario fixes a domain ``A``, an initial datum ``u0`` that blows up on
``boundary A``, the capped-problem parameters and the grids.  From it we
build

* the capped graph problem,
* ``vtilde``: the level-set flow of ``boundary A`` on the graph grid,
* for radial domains, on a taller Axisym2D grid: ``w`` (the supergraph of
  ``u0``), ``v`` (the cylinder ``A x R``) and a radial ``vtilde`` on the
  same radial grid for the product check.
"""

from __future__ import annotations

import ast
import json
import operator
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import numpy as np

from .fields import ESCAPED, GraphField, Label, LevelSetField, Mode, make_grid
from .graphflow import SCHEMES, CappedProblem, cfl_dt
from .levelset import (
    Annulus,
    Ball,
    Capsule,
    Cylinder,
    Difference,
    LevelSetProblem,
    RadialGraph,
    Union,
    levelset_cfl,
    truncated_signed_distance,
)
from .timeloop import uniform_times


class ConfigError(ValueError):
    """Invalid scenario configuration."""


# ---------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class Domain:
    type: str
    params: dict

    @property
    def radial(self) -> bool:
        return self.type in ("Ball", "Annulus")

    @property
    def outer_radius(self) -> float:
        p = self.params
        if self.type == "Ball":
            return p["rho"]
        if self.type == "Annulus":
            return p["rho2"]
        if self.type == "Dumbbell":
            return p["separation"] / 2 + p["radius"]
        return p["rho"]

    def shape(self):
        p = self.params
        if self.type == "Ball":
            return Ball(p["rho"])
        if self.type == "Annulus":
            return Annulus(p["rho1"], p["rho2"])
        if self.type == "Dumbbell":
            c = p["separation"] / 2
            return Union((
                Ball(p["radius"], (-c, 0.0)),
                Ball(p["radius"], (c, 0.0)),
                Capsule((-c, 0.0), (c, 0.0), p["neck"]),
            ))
        holes = tuple(Ball(h["radius"], tuple(h["center"])) for h in p["holes"])
        return Difference(Ball(p["rho"]), holes)

    def validate(self):
        p = self.params
        try:
            if self.type == "Ball":
                ok = p["rho"] > 0
                msg = "Ball needs rho > 0"
            elif self.type == "Annulus":
                ok = 0 < p["rho1"] < p["rho2"]
                msg = "Annulus needs 0 < rho1 < rho2"
            elif self.type == "Dumbbell":
                ok = p["radius"] > 0 and 0 < p["neck"] < p["radius"] and p["separation"] > 2 * p["radius"]
                msg = "Dumbbell needs radius > neck > 0 and separation > 2 radius (balls must not overlap)"
            elif self.type == "MultiHole":
                ok = p["rho"] > 0 and len(p["holes"]) > 0
                for h in p["holes"]:
                    c = np.asarray(h["center"], float)
                    ok = ok and h["radius"] > 0 and np.linalg.norm(c) + h["radius"] < p["rho"]
                holes = p["holes"]
                for i in range(len(holes)):
                    for j in range(i + 1, len(holes)):
                        gap = np.linalg.norm(np.subtract(holes[i]["center"], holes[j]["center"]))
                        ok = ok and gap > holes[i]["radius"] + holes[j]["radius"]
                msg = "MultiHole needs disjoint holes strictly inside the disc"
            else:
                raise ConfigError(f"unknown domain type {self.type!r}")
        except KeyError as e:
            raise ConfigError(f"domain {self.type} is missing parameter {e}") from None
        if not ok:
            raise ConfigError(msg)


# ---------------------------------------------------------------------------
# custom datum grammar

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}


def evaluate_expression(expr: str, env: dict[str, np.ndarray]) -> np.ndarray:
    """Evaluate ``+ - * / ^`` (``^`` is a power) over the names in ``env`` and numbers."""
    try:
        tree = ast.parse(expr.replace("^", "**"), mode="eval")
    except SyntaxError as e:
        raise ConfigError(f"cannot parse datum expression {expr!r}: {e.msg}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id not in env:
                raise ConfigError(f"unknown name {node.id!r} in datum expression (allowed: {sorted(env)})")
            return env[node.id]
        raise ConfigError(f"unsupported syntax in datum expression: {ast.dump(node)[:40]}")

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return np.asarray(ev(tree), dtype=float)


# ---------------------------------------------------------------------------
# configuration


@dataclass
class ScenarioConfig:
    name: str
    domain: Domain
    n: int = 1
    datum: str = "PaperDefault"
    L: float = 20.0
    eps: float = 0.05
    R: float | None = None
    T: float = 0.6
    h: float = 0.005
    snap_dt: float = 0.01
    dt: float | None = None
    scheme: str = "central"
    h_w: float = 0.02
    w_window: tuple | None = None
    build_w: bool = True
    outputs: list = field(default_factory=lambda: ["csv", "snapshots", "ndjson", "svg"])
    checks: list = field(default_factory=lambda: ["all"])

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        d = dict(d)
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        if "name" not in d or "domain" not in d:
            raise ConfigError("configuration needs 'name' and 'domain'")
        dom = d.pop("domain")
        if not isinstance(dom, dict) or "type" not in dom:
            raise ConfigError("domain must be an object with a 'type'")
        dom = dict(dom)
        d["domain"] = Domain(dom.pop("type"), dom)
        datum = d.get("datum", "PaperDefault")
        if isinstance(datum, dict):
            if "expr" not in datum:
                raise ConfigError("custom datum needs an 'expr'")
            d["datum"] = datum["expr"]
        if d.get("w_window") is not None:
            d["w_window"] = tuple(float(x) for x in d["w_window"])
        cfg = cls(**d)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["domain"] = {"type": self.domain.type, **self.domain.params}
        if self.datum != "PaperDefault":
            out["datum"] = {"expr": self.datum}
        if self.w_window is not None:
            out["w_window"] = list(self.w_window)
        return out

    @property
    def mode(self) -> Mode:
        if self.domain.radial:
            return Mode.RADIAL1D
        if self.domain.type == "Dumbbell" and self.n == 2:
            return Mode.CARTESIAN3D
        return Mode.CARTESIAN2D

    @property
    def radius_R(self) -> float:
        return self.domain.outer_radius + 1 if self.R is None else self.R

    def validate(self) -> None:
        self.domain.validate()
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if self.domain.type == "MultiHole" and self.n != 1:
            raise ConfigError("MultiHole domains are planar: n must be 1")
        if self.domain.type == "Dumbbell" and self.n not in (1, 2):
            raise ConfigError("Dumbbell domains need n = 1 (plane) or n = 2 (space)")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.scheme == "monotone" and not self.domain.radial:
            raise ConfigError("the monotone scheme needs a radial (Ball or Annulus) domain")
        for key in ("h", "T", "snap_dt", "h_w"):
            if not getattr(self, key) > 0:
                raise ConfigError(f"{key} must be positive")
        if not 0 < self.eps <= 1:
            raise ConfigError(f"eps must lie in (0, 1], got {self.eps}")
        if self.radius_R < self.domain.outer_radius + 1 - 1e-12:
            raise ConfigError(
                f"R={self.radius_R} must be at least the outer domain radius + 1 = {self.domain.outer_radius + 1}"
            )
        if abs(self.radius_R / self.h - round(self.radius_R / self.h)) > 1e-6:
            raise ConfigError(f"R={self.radius_R} must be a multiple of h={self.h}")
        if self.dt is not None:
            limit = cfl_dt(GraphField(self.graph_grid(), np.zeros(self.graph_grid().shape)))
            if self.dt > limit * (1 + 1e-9):
                raise ConfigError(f"fixed dt={self.dt} exceeds the stability limit {limit:.6g}")

    def graph_grid(self):
        return make_grid(self.mode, self.h, self.radius_R, self.n)


# ---------------------------------------------------------------------------
# built-in scenarios

BUILTIN: dict[str, dict[str, Any]] = {
    "bowl": {
        "name": "bowl",
        "domain": {"type": "Ball", "rho": 1.0},
        "n": 1,
        "L": 100.0,
        "eps": 0.01,
        "T": 0.6,
        "h": 0.005,
        "snap_dt": 0.01,
        "w_window": [-0.5, 22.5],
    },
    "annulus": {
        "name": "annulus",
        "domain": {"type": "Annulus", "rho1": 0.3, "rho2": 1.0},
        "n": 1,
        "L": 100.0,
        "eps": 0.01,
        "T": 0.1,
        "h": 0.005,
        "snap_dt": 0.0025,
        "scheme": "monotone",
        "w_window": [1.5, 23.5],
    },
    "neckpinch": {
        "name": "neckpinch",
        "domain": {"type": "Dumbbell", "separation": 1.4, "radius": 0.5, "neck": 0.15},
        "n": 2,
        "L": 60.0,
        "eps": 0.08,
        "T": 0.03,
        "h": 0.04,
        "snap_dt": 0.001,
        "build_w": False,
    },
    "cheese": {
        "name": "cheese",
        "domain": {
            "type": "MultiHole",
            "rho": 1.0,
            "holes": [
                {"center": [-0.4, 0.0], "radius": 0.15},
                {"center": [0.4, 0.0], "radius": 0.15},
                {"center": [0.0, 0.45], "radius": 0.12},
            ],
        },
        "n": 1,
        "L": 20.0,
        "eps": 0.12,
        "T": 0.1,
        "h": 0.02,
        "snap_dt": 0.005,
        "build_w": False,
    },
}


def load_config(name_or_path: str, **overrides) -> ScenarioConfig:
    """Built-in scenario by name or a JSON file; ``overrides`` replace top-level keys."""
    if name_or_path in BUILTIN:
        d = json.loads(json.dumps(BUILTIN[name_or_path]))
    else:
        p = Path(name_or_path)
        if p.suffix != ".json" or not p.exists():
            raise KeyError(f"unknown scenario {name_or_path!r}; built-ins: {sorted(BUILTIN)}")
        try:
            d = json.loads(p.read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"{p}: invalid JSON ({e})") from None
    d.update({k: v for k, v in overrides.items() if v is not None})
    return ScenarioConfig.from_dict(d)


# ---------------------------------------------------------------------------
# construction


def domain_distance(cfg: ScenarioConfig, grid) -> np.ndarray:
    """Distance to ``boundary A`` inside ``A`` (component-wise for unions), ``<= 0`` outside."""
    return -cfg.domain.shape().signed(grid)


def initial_datum(cfg: ScenarioConfig, grid=None) -> GraphField:
    """``u0`` on the graph grid, ESCAPED outside ``A``.

    The default datum is ``1/dist(x, boundary A) + |x|^2``.
    """
    grid = cfg.graph_grid() if grid is None else grid
    dist = domain_distance(cfg, grid)
    # nodes on the boundary up to rounding are outside, not 1/1e-17
    inside = dist > 1e-9 * grid.h
    mesh = grid.mesh()
    env = {"r": grid.radius(), "dist": np.where(inside, dist, np.nan)}
    names = ("x", "y", "z")
    if not grid.is_radial:
        env.update({names[k]: mesh[k] for k in range(grid.ndim)})
    if cfg.datum == "PaperDefault":
        with np.errstate(divide="ignore"):
            vals = 1.0 / env["dist"] + env["r"] ** 2
    else:
        vals = np.broadcast_to(evaluate_expression(cfg.datum, env), grid.shape)
    vals = np.where(inside & np.isfinite(vals), vals, ESCAPED)
    if not np.isfinite(vals).any():
        raise ConfigError("initial datum has no finite node; refine h or enlarge the domain")
    return GraphField(grid, vals)


def radial_profile(cfg: ScenarioConfig):
    """``u0`` as a function of the radius (radial domains, default datum or expressions in r)."""
    if not cfg.domain.radial:
        raise ConfigError("radial profiles exist for Ball and Annulus domains only")
    shape = cfg.domain.shape()

    def profile(r):
        r = np.asarray(r, dtype=float)
        if cfg.domain.type == "Ball":
            dist = shape.radius - r
        else:
            dist = np.minimum(r - shape.r_in, shape.r_out - r)
        inside = dist > 0
        env = {"r": r, "dist": np.where(inside, dist, np.nan)}
        if cfg.datum == "PaperDefault":
            with np.errstate(divide="ignore", invalid="ignore"):
                vals = 1.0 / env["dist"] + r**2
        else:
            vals = np.broadcast_to(evaluate_expression(cfg.datum, env), r.shape)
        return np.where(inside & np.isfinite(vals), vals, np.inf)

    return profile


def capped_profile(profile, L: float):
    """``min(u0, L)`` with the cap value wherever ``u0`` is undefined."""

    def capped(r):
        return np.minimum(profile(r), L)

    return capped


@dataclass
class Scenario:
    cfg: ScenarioConfig
    graph: CappedProblem
    vtilde: LevelSetProblem
    w: LevelSetProblem | None = None
    v: LevelSetProblem | None = None
    vtilde_w: LevelSetProblem | None = None
    snap_times: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def a(self) -> float:
        return self.graph.L - 5


def w_grid(cfg: ScenarioConfig, h: float | None = None, window=None):
    """Axisym2D grid for ``w`` and ``v`` with its physical z offset."""
    h = cfg.h_w if h is None else h
    lo, hi = cfg.w_window if window is None else window
    half = (hi - lo) / 2
    half = np.ceil(half / h - 1e-9) * h
    r_ext = np.ceil(cfg.radius_R / h - 1e-9) * h
    return make_grid(Mode.AXISYM2D, h, (r_ext, half), cfg.n), (lo + hi) / 2


def _default_window(cfg: ScenarioConfig):
    prof = radial_profile(cfg)
    r = np.linspace(0, cfg.domain.outer_radius, 20001)
    umin = float(np.min(prof(r)))
    return (np.floor(umin) - 1.5, np.floor(umin) + 20.5)


def w_problem(cfg: ScenarioConfig, profile, h=None, window=None, label=Label.W_GRAPH) -> LevelSetProblem:
    window = cfg.w_window or _default_window(cfg) if window is None else window
    grid, z_off = w_grid(cfg, h, window)
    if label is Label.V_CYLINDER:
        w0 = truncated_signed_distance(Cylinder(cfg.domain.shape()), grid, label)
    else:
        w0 = truncated_signed_distance(RadialGraph(profile), grid, label, z_offset=z_off)
    return LevelSetProblem(w0, cfg.T, z_offset=z_off)


def build_scenario(cfg: ScenarioConfig) -> Scenario:
    """Capped graph problem plus the level-set problems of the scenario."""
    grid = cfg.graph_grid()
    u0 = initial_datum(cfg, grid)
    try:
        graph = CappedProblem(u0, cfg.L, cfg.eps, cfg.radius_R, cfg.T, cfg.dt, cfg.scheme)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    shape = cfg.domain.shape()
    vt0 = truncated_signed_distance(shape, grid, Label.VTILDE_BOUNDARY)
    scen_times = uniform_times(cfg.T, cfg.snap_dt)
    if not cfg.domain.radial or not cfg.build_w:
        vtilde = LevelSetProblem(vt0, cfg.T)
        return Scenario(cfg, graph, vtilde, snap_times=scen_times)
    # the radial vtilde uses the Axisym2D step so that it matches v step for step
    ax = make_grid(Mode.AXISYM2D, cfg.h, (grid.extents[0], 4 * cfg.h), cfg.n)
    vtilde = LevelSetProblem(vt0, cfg.T, dt=min(levelset_cfl(grid), levelset_cfl(ax)))
    profile = radial_profile(cfg)
    w = w_problem(cfg, profile)
    v = w_problem(cfg, profile, label=Label.V_CYLINDER)
    v_dt = levelset_cfl(v.w0.grid)
    line = make_grid(Mode.RADIAL1D, cfg.h_w, v.w0.grid.extents[0], cfg.n)
    vtilde_w = LevelSetProblem(truncated_signed_distance(shape, line), cfg.T, dt=v_dt)
    return Scenario(cfg, graph, vtilde, w, v, vtilde_w, scen_times)


def capped_w_family(cfg: ScenarioConfig, Ls, h=None, window=None):
    """Problems ``w^L`` (supergraph of ``min(u0, L)``) for each cap plus ``w`` itself.

    The supergraph of ``min(u0, L)`` is the union of the supergraph of
    ``u0`` with the half-space ``{z > L}``, so ``w^L`` starts from
    ``min(w0, L - z)``.  This keeps the initial data exactly ordered in ``L``.
    """
    w = w_problem(cfg, radial_profile(cfg), h, window)
    grid = w.w0.grid
    z = grid.mesh()[1] + w.z_offset
    family = []
    for L in Ls:
        w0 = np.clip(np.minimum(w.w0.values, L - z), -1.0, 1.0)
        family.append(LevelSetProblem(LevelSetField(grid, w0, 0.0, Label.W_GRAPH), cfg.T, z_offset=w.z_offset))
    return family, w
