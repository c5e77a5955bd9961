"""Capped graphical mean curvature flow against level-set flow, in radial and Cartesian settings."""

from .fields import (
    ESCAPED,
    GraphField,
    GridSpec,
    Label,
    LevelSetField,
    Mode,
    Trajectory,
    make_grid,
    zero_crossings,
)
from .graphflow import CappedProblem, SchemeInstability, cap_sweep, mcf_rhs, solve_capped, step
from .levelset import LevelSetProblem, Verdict, solve_levelset, truncated_signed_distance
from .pipeline import RunResult, evaluate_checks, load_run, run_scenario, write_run
from .scenarios import BUILTIN, ConfigError, ScenarioConfig, build_scenario, load_config

__all__ = [
    "BUILTIN",
    "ESCAPED",
    "CappedProblem",
    "ConfigError",
    "GraphField",
    "GridSpec",
    "Label",
    "LevelSetField",
    "LevelSetProblem",
    "Mode",
    "RunResult",
    "ScenarioConfig",
    "SchemeInstability",
    "Trajectory",
    "Verdict",
    "build_scenario",
    "cap_sweep",
    "evaluate_checks",
    "load_config",
    "load_run",
    "make_grid",
    "mcf_rhs",
    "run_scenario",
    "solve_capped",
    "solve_levelset",
    "step",
    "truncated_signed_distance",
    "write_run",
    "zero_crossings",
]
