"""Pointwise geometry of graphs and the smooth-minimum machinery.

For a graph ``x -> (x, u(x))`` over R^{n+1} the gradient function is
``v = sqrt(1 + |Du|^2)`` and the mean curvature is
``H = div(Du / v)``, positive for strictly convex ``u``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .fields import ESCAPED, GraphField, Mode
from .stencils import escape_influence, filled, gradient_hessian


@dataclass(frozen=True)
class GraphGeometry:
    v: np.ndarray
    H: np.ndarray
    A2: np.ndarray
    G: np.ndarray
    k_used: float


@dataclass(frozen=True)
class MollifierSpec:
    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    @property
    def kernel_radius(self) -> float:
        return self.epsilon


def _derivs(u: GraphField):
    grad, hess = gradient_hessian(filled(u.values), u.grid)
    bad = escape_influence(u.escaped, u.grid)
    return grad, hess, bad


def _finish(out: np.ndarray, bad: np.ndarray) -> np.ndarray:
    if bad.any():
        out = np.where(bad, ESCAPED, out)
    return out


def _radial_curvatures(u: GraphField):
    """Principal curvatures (k_r, k_theta) of a radial graph; k_theta has multiplicity n."""
    grad, hess, bad = _derivs(u)
    ur, urr = grad[0], hess[0][0]
    v = np.sqrt(1 + ur**2)
    r = u.grid.axis(0)
    k_r = urr / v**3
    with np.errstate(divide="ignore", invalid="ignore"):
        k_t = np.where(r > 0, ur / (np.where(r > 0, r, 1.0) * v), k_r)
    return k_r, k_t, bad


def _shape_operator_terms(u: GraphField):
    grad, hess, bad = _derivs(u)
    p = np.stack(grad, axis=-1)
    D2 = np.stack([np.stack(row, axis=-1) for row in hess], axis=-2)
    v2 = 1.0 + np.einsum("...i,...i->...", p, p)
    d = p.shape[-1]
    ginv = np.eye(d) - p[..., :, None] * p[..., None, :] / v2[..., None, None]
    return ginv, D2, v2, bad


def gradient_function(u: GraphField) -> np.ndarray:
    """``v = sqrt(1 + |Du|^2)``; ESCAPED wherever the stencil leaves the domain."""
    grad, _, bad = _derivs(u)
    return _finish(np.sqrt(1.0 + sum(g**2 for g in grad)), bad)


def mean_curvature(u: GraphField) -> np.ndarray:
    n = u.grid.n
    if u.grid.mode is Mode.RADIAL1D:
        k_r, k_t, bad = _radial_curvatures(u)
        return _finish(k_r + n * k_t, bad)
    ginv, D2, v2, bad = _shape_operator_terms(u)
    H = np.einsum("...ij,...ij->...", ginv, D2) / np.sqrt(v2)
    return _finish(H, bad)


def second_fundamental_norm(u: GraphField) -> np.ndarray:
    """``|A|^2``, the sum of squared principal curvatures."""
    n = u.grid.n
    if u.grid.mode is Mode.RADIAL1D:
        k_r, k_t, bad = _radial_curvatures(u)
        return _finish(k_r**2 + n * k_t**2, bad)
    ginv, D2, v2, bad = _shape_operator_terms(u)
    W = np.einsum("...ij,...jk->...ik", ginv, D2)
    A2 = np.einsum("...ij,...ji->...", W, W) / v2
    return _finish(A2, bad)


def g_quantity(u: GraphField, k: float):
    """``G = v^2/(1 - k v^2) |A|^2`` and the mask where ``k v^2 <= 1/2``.

    Invalid nodes carry NaN in the returned field.
    """
    if not k > 0:
        raise ValueError("k must be positive")
    v = gradient_function(u)
    A2 = second_fundamental_norm(u)
    return g_from(v, A2, k)


def g_from(v: np.ndarray, A2: np.ndarray, k: float):
    kv2 = k * v**2
    valid = np.isfinite(v) & np.isfinite(A2) & (kv2 <= 0.5)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        G = np.where(valid, v**2 / (1.0 - kv2) * A2, np.nan)
    return G, valid


def graph_geometry(u: GraphField, k: float) -> GraphGeometry:
    v = gradient_function(u)
    A2 = second_fundamental_norm(u)
    G, _ = g_from(v, A2, k)
    return GraphGeometry(v=v, H=mean_curvature(u), A2=A2, G=G, k_used=k)


def smooth_min_profile(x):
    """C^2 nondecreasing approximation of ``min(x, 0)``, exact for ``|x| >= 1``.

    On (-1, 1) it is the Hermite interpolant matching value, slope and
    curvature at both ends: ``x^4/16 - 3x^2/8 + x/2 - 3/16``.
    """
    x = np.asarray(x, dtype=float)
    mid = x**4 / 16 - 3 * x**2 / 8 + x / 2 - 3.0 / 16
    out = np.where(x <= -1.0, x, np.where(x >= 1.0, 0.0, mid))
    return out[()] if out.ndim == 0 else out


def smooth_min_slope(x):
    x = np.asarray(x, dtype=float)
    mid = (x - 1) ** 2 * (x + 2) / 4
    out = np.where(x <= -1.0, 1.0, np.where(x >= 1.0, 0.0, mid))
    return out[()] if out.ndim == 0 else out


def mollified_min(a, b, eps: float):
    """``eps * f((a - b)/eps) + b``; an ESCAPED ``a`` yields ``b``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    esc = ~np.isfinite(a)
    with np.errstate(invalid="ignore"):
        out = eps * smooth_min_profile(np.where(esc, 0.0, (a - b) / eps)) + b
    out = np.where(esc, b, out)
    return out[()] if np.ndim(out) == 0 else out


def bump(s):
    """Unnormalized standard bump ``exp(-1/(1 - s^2))`` supported on ``|s| < 1``."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def mollify_initial(u0: GraphField, eps: float, fill: float | None = None) -> GraphField:
    """Convolve ``u0`` with a discretely normalized bump of radius ``eps``.

    Escaped nodes contribute ``fill`` to the average (the cap value) and
    stay escaped in the output.  For ``eps < h`` the field is returned as is.
    """
    grid = u0.grid
    if eps < grid.h:
        return u0
    esc = u0.escaped
    if esc.any() and fill is None:
        raise ValueError("u0 has escaped nodes; a fill value is required")
    vals = filled(u0.values, 0.0 if fill is None else fill)
    if grid.mode is Mode.RADIAL1D:
        out = _mollify_radial(vals, grid, eps)
    elif grid.mode is Mode.AXISYM2D:
        raise ValueError("mollification of graphs is defined on Radial1D/Cartesian grids")
    else:
        m = int(np.floor(eps / grid.h))
        offs = np.arange(-m, m + 1) * grid.h
        mesh = np.meshgrid(*([offs] * grid.ndim), indexing="ij")
        kern = bump(np.sqrt(sum(c**2 for c in mesh)) / eps)
        kern /= kern.sum()
        out = ndimage.convolve(vals, kern, mode="nearest")
    out = np.where(esc, ESCAPED, out)
    return GraphField(grid, out, u0.time)


def _mollify_radial(vals: np.ndarray, grid, eps: float) -> np.ndarray:
    # quadrature over the eps-ball of R^{n+1} in (axial s, transverse rho) coordinates
    n = grid.n
    q = eps / 16
    s = (np.arange(-16, 16) + 0.5) * q
    rho = (np.arange(16) + 0.5) * q
    S, P = np.meshgrid(s, rho, indexing="ij")
    w = bump(np.sqrt(S**2 + P**2) / eps) * P ** (n - 1)
    keep = w > 0
    S, P, w = S[keep], P[keep], w[keep]
    w = w / w.sum()
    r = grid.axis(0)
    rad = np.sqrt((r[:, None] + S[None, :]) ** 2 + P[None, :] ** 2)
    return (np.interp(rad, r, vals) * w[None, :]).sum(axis=1)
