"""Grids, fields and trajectory containers shared by the graph and level-set solvers.

A graph field stores ``u`` on a uniform grid and uses ``ESCAPED`` (``+inf``)
for nodes that are not in the current domain of definition.  Level-set fields
store truncated signed-distance-like functions with values in ``[-1, 1]``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

ESCAPED = np.inf


class Mode(str, enum.Enum):
    RADIAL1D = "Radial1D"
    AXISYM2D = "Axisym2D"
    CARTESIAN2D = "Cartesian2D"
    CARTESIAN3D = "Cartesian3D"


class Label(str, enum.Enum):
    W_GRAPH = "W_graph"
    VTILDE_BOUNDARY = "Vtilde_boundary"
    V_CYLINDER = "V_cylinder"


_NDIM = {Mode.RADIAL1D: 1, Mode.AXISYM2D: 2, Mode.CARTESIAN2D: 2, Mode.CARTESIAN3D: 3}


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid descriptor.

    Radial1D covers ``r in [0, extent]``.  Axisym2D covers
    ``(r, z) in [0, E_r] x [-E_z, E_z]``.  Cartesian grids cover
    ``[-E_k, E_k]`` along every axis.  ``extent`` is a scalar or one
    half-width per axis.
    """

    mode: Mode
    h: float
    extent: float | tuple[float, ...]
    n: int

    @property
    def ndim(self) -> int:
        return _NDIM[self.mode]

    @property
    def extents(self) -> tuple[float, ...]:
        if isinstance(self.extent, tuple):
            return self.extent
        return (float(self.extent),) * self.ndim

    @property
    def is_radial(self) -> bool:
        """True when axis 0 is a radius with even reflection at r = 0."""
        return self.mode in (Mode.RADIAL1D, Mode.AXISYM2D)

    def axis(self, k: int) -> np.ndarray:
        e = self.extents[k]
        m = int(round(e / self.h))
        if self.is_radial and k == 0:
            return np.arange(m + 1) * self.h
        return np.arange(-m, m + 1) * self.h

    @property
    def axes(self) -> tuple[np.ndarray, ...]:
        return tuple(self.axis(k) for k in range(self.ndim))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.axes)

    def mesh(self) -> tuple[np.ndarray, ...]:
        return np.meshgrid(*self.axes, indexing="ij")

    def radius(self) -> np.ndarray:
        """Distance of every node from the origin of the spatial domain.

        For Axisym2D this is the radial coordinate only (the distance from
        the symmetry axis), which is what the graph/level-set domains use.
        """
        if self.mode is Mode.RADIAL1D:
            return self.axis(0)
        if self.mode is Mode.AXISYM2D:
            return self.mesh()[0]
        return np.sqrt(sum(c**2 for c in self.mesh()))

    def header_extent(self) -> str:
        if isinstance(self.extent, tuple):
            return ",".join(repr(float(e)) for e in self.extent)
        return repr(float(self.extent))


def make_grid(mode: Mode | str, h: float, extent: float | Sequence[float], n: int) -> GridSpec:
    """Validate and build a :class:`GridSpec`.

    Cartesian2D hosts the domain of a graph in the plane, so it fixes
    ``n = 1``.  Cartesian3D hosts either the graph level set for ``n = 1``
    or a spatial domain in R^3 (``n = 2``).
    """
    mode = Mode(mode)
    if not h > 0:
        raise ValueError(f"grid spacing must be positive, got h={h}")
    if n < 1:
        raise ValueError(f"dimension parameter n must be >= 1, got n={n}")
    if mode is Mode.CARTESIAN2D and n != 1:
        raise ValueError(f"{mode.value} requires n = 1, got n={n}")
    if mode is Mode.CARTESIAN3D and n not in (1, 2):
        raise ValueError(f"{mode.value} requires n in (1, 2), got n={n}")
    if np.ndim(extent) == 0:
        ext: float | tuple[float, ...] = float(extent)
        per_axis = (float(extent),) * _NDIM[mode]
    else:
        per_axis = tuple(float(e) for e in extent)
        if len(per_axis) != _NDIM[mode]:
            raise ValueError(f"{mode.value} needs {_NDIM[mode]} extents, got {len(per_axis)}")
        ext = per_axis
    for e in per_axis:
        if e < 4 * h - 1e-12:
            raise ValueError(f"extent {e} is smaller than 4h = {4 * h}")
        if abs(e / h - round(e / h)) > 1e-6:
            raise ValueError(f"extent {e} is not a multiple of h = {h}")
    return GridSpec(mode, float(h), ext, int(n))


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class GraphField:
    """Height function ``u`` on a grid; ``ESCAPED`` marks nodes outside the domain."""

    grid: GridSpec
    values: np.ndarray
    time: float = 0.0
    lower_bound: float = field(default=-np.inf)

    def __post_init__(self):
        vals = _readonly(self.values)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values shape {vals.shape} does not match grid {self.grid.shape}")
        if np.isnan(vals).any():
            raise ValueError("graph values contain NaN")
        if np.isneginf(vals).any():
            raise ValueError("graph values contain -inf")
        object.__setattr__(self, "values", vals)
        finite = vals[np.isfinite(vals)]
        if finite.size and not np.isfinite(self.lower_bound):
            object.__setattr__(self, "lower_bound", float(finite.min()))

    @property
    def escaped(self) -> np.ndarray:
        return ~np.isfinite(self.values)

    def with_values(self, values: np.ndarray, time: float | None = None) -> "GraphField":
        return GraphField(self.grid, values, self.time if time is None else time, self.lower_bound)


@dataclass(frozen=True)
class LevelSetField:
    """Truncated signed-distance-like function with values in ``[-1, 1]``."""

    grid: GridSpec
    values: np.ndarray
    time: float = 0.0
    label: Label = Label.VTILDE_BOUNDARY

    def __post_init__(self):
        vals = _readonly(self.values)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values shape {vals.shape} does not match grid {self.grid.shape}")
        if not np.isfinite(vals).all():
            raise ValueError("level-set values must be finite")
        if vals.size and (vals.min() < -1.0 or vals.max() > 1.0):
            raise ValueError("level-set values must lie in [-1, 1]")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "label", Label(self.label))

    def with_values(self, values: np.ndarray, time: float | None = None) -> "LevelSetField":
        return LevelSetField(self.grid, values, self.time if time is None else time, self.label)


@dataclass
class Trajectory:
    """Snapshots with strictly increasing times on one grid, plus monitor records."""

    snapshots: list = field(default_factory=list)
    monitors: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def append(self, snap) -> None:
        if self.snapshots:
            if snap.grid != self.snapshots[0].grid:
                raise ValueError("all snapshots must share one grid")
            if not snap.time > self.snapshots[-1].time:
                raise ValueError(
                    f"snapshot time {snap.time} not after {self.snapshots[-1].time}"
                )
        self.snapshots.append(snap)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])

    @property
    def grid(self) -> GridSpec:
        return self.snapshots[0].grid

    def __len__(self) -> int:
        return len(self.snapshots)

    def __getitem__(self, i):
        return self.snapshots[i]

    def __iter__(self):
        return iter(self.snapshots)

    def nearest(self, t: float):
        i = int(np.argmin(np.abs(self.times - t)))
        return self.snapshots[i]


def zero_crossings(field, axis_line=None) -> list[float]:
    """Linearly interpolated sign changes of ``field`` along one grid line.

    ``field`` may be a :class:`LevelSetField` or ``(coords, values)``.
    ``axis_line`` selects the line for multi-dimensional grids: a tuple with
    one ``slice(None)`` entry and integer indices elsewhere.  The default is
    the line through the middle of the grid along axis 0 (``z = 0`` for
    Axisym2D).
    """
    if isinstance(field, tuple):
        coords, vals = (np.asarray(a, dtype=float) for a in field)
    else:
        grid = field.grid
        vals = np.asarray(field.values)
        if axis_line is None:
            axis_line = (slice(None),) + tuple(s // 2 for s in grid.shape[1:])
        k = [i for i, s in enumerate(axis_line) if isinstance(s, slice)]
        if len(k) != 1:
            raise ValueError("axis_line must contain exactly one slice")
        coords = grid.axis(k[0])
        vals = vals[tuple(axis_line)]
    if not np.isfinite(vals).all():
        raise ValueError("zero_crossings needs finite values")
    out: list[float] = []
    sgn = np.sign(vals)
    i, m = 0, len(vals)
    while i < m - 1:
        if sgn[i] == 0:
            i += 1
            continue
        j = i + 1
        while j < m and sgn[j] == 0:
            j += 1
        if j == m:
            break
        if sgn[j] != sgn[i]:
            if j == i + 1:
                a, b = vals[i], vals[j]
                out.append(float(coords[i] + (coords[j] - coords[i]) * a / (a - b)))
            else:
                # run of exact zeros between opposite signs
                out.append(float(0.5 * (coords[i + 1] + coords[j - 1])))
        i = j
    return out


def escaped_region(u: GraphField, a: float) -> np.ndarray:
    """Nodes where ``u`` is ESCAPED or at least ``a`` (discrete complement of the domain)."""
    if not np.isfinite(a):
        raise ValueError("threshold must be finite")
    vals = u.values
    return ~np.isfinite(vals) | (vals >= a)
