"""Second-order finite-difference stencils on uniform grids.

Interior nodes use central differences.  The radial axis of Radial1D and
Axisym2D grids is closed by even reflection at ``r = 0``; every other grid
edge uses one-sided second-order formulas.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .fields import GridSpec


def d1(a: np.ndarray, h: float, axis: int = 0, reflect_lo: bool = False) -> np.ndarray:
    b = np.moveaxis(np.asarray(a, dtype=float), axis, 0)
    out = np.empty_like(b)
    out[1:-1] = (b[2:] - b[:-2]) / (2 * h)
    if reflect_lo:
        out[0] = 0.0
    else:
        out[0] = (-3 * b[0] + 4 * b[1] - b[2]) / (2 * h)
    out[-1] = (3 * b[-1] - 4 * b[-2] + b[-3]) / (2 * h)
    return np.moveaxis(out, 0, axis)


def d2(a: np.ndarray, h: float, axis: int = 0, reflect_lo: bool = False) -> np.ndarray:
    b = np.moveaxis(np.asarray(a, dtype=float), axis, 0)
    out = np.empty_like(b)
    h2 = h * h
    out[1:-1] = (b[2:] - 2 * b[1:-1] + b[:-2]) / h2
    if reflect_lo:
        out[0] = 2 * (b[1] - b[0]) / h2
    elif b.shape[0] >= 4:
        out[0] = (2 * b[0] - 5 * b[1] + 4 * b[2] - b[3]) / h2
    else:
        out[0] = out[1]
    if b.shape[0] >= 4:
        out[-1] = (2 * b[-1] - 5 * b[-2] + 4 * b[-3] - b[-4]) / h2
    else:
        out[-1] = out[-2]
    return np.moveaxis(out, 0, axis)


def gradient_hessian(values: np.ndarray, grid: GridSpec):
    """Return ``(grad, hess)`` with ``grad[k]`` and ``hess[k][l]`` arrays.

    ``values`` must be finite; callers mask escaped nodes separately.
    """
    h = grid.h
    d = grid.ndim
    radial = grid.is_radial
    grad = [d1(values, h, k, reflect_lo=radial and k == 0) for k in range(d)]
    hess = [[None] * d for _ in range(d)]
    for k in range(d):
        hess[k][k] = d2(values, h, k, reflect_lo=radial and k == 0)
        for l in range(k + 1, d):
            hess[k][l] = hess[l][k] = d1(grad[k], h, l, reflect_lo=radial and l == 0)
    return grad, hess


def escape_influence(escaped: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Nodes whose (3^d, one-sided widened) stencil touches an escaped node."""
    if not escaped.any():
        return escaped.copy()
    structure = np.ones((3,) * escaped.ndim, dtype=bool)
    # one-sided edge formulas reach two cells inward
    return ndimage.binary_dilation(escaped, structure=structure, iterations=2)


def filled(values: np.ndarray, fill: float = 0.0) -> np.ndarray:
    out = np.array(values, dtype=float)
    out[~np.isfinite(out)] = fill
    return out
