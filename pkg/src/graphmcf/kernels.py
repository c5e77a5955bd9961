"""Compiled forward-Euler steps for the level-set and graph operators.

These reproduce the array formulas of :mod:`graphmcf.levelset` and
:mod:`graphmcf.graphflow` node by node, with the same floating-point
operation order, so that the z-independent Axisym2D update equals the
Radial1D update bit for bit.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _refl(i, m):
    if i < 0:
        return -i
    if i > m - 1:
        return 2 * (m - 1) - i
    return i


@njit(cache=True, nogil=True)
def ls_step_1d(w, out, dt, h, n, d2, radial):
    m = w.shape[0]
    h2 = h * h
    for i in range(m):
        c = w[i]
        f = w[_refl(i + 1, m)]
        b = w[_refl(i - 1, m)]
        g0 = (f - b) / (2 * h)
        s0 = (f - 2 * c + b) / h2
        lap = s0
        if radial:
            if i == 0:
                lap = lap + n * s0
            else:
                lap = lap + n * g0 / (i * h)
        q = g0 * g0 * s0
        den = g0 * g0
        den = den + d2
        val = c + dt * (lap - q / den)
        out[i] = min(1.0, max(-1.0, val))


@njit(cache=True, nogil=True)
def ls_step_2d(w, out, dt, h, n, d2, radial):
    m0, m1 = w.shape
    h2 = h * h
    for i in range(m0):
        ip = _refl(i + 1, m0)
        im = _refl(i - 1, m0)
        for j in range(m1):
            jp = _refl(j + 1, m1)
            jm = _refl(j - 1, m1)
            c = w[i, j]
            g0 = (w[ip, j] - w[im, j]) / (2 * h)
            g1 = (w[i, jp] - w[i, jm]) / (2 * h)
            s0 = (w[ip, j] - 2 * c + w[im, j]) / h2
            s1 = (w[i, jp] - 2 * c + w[i, jm]) / h2
            lap = s0 + s1
            if radial:
                if i == 0:
                    lap = lap + n * s0
                else:
                    lap = lap + n * g0 / (i * h)
            q = g0 * g0 * s0
            den = g0 * g0
            q = q + g1 * g1 * s1
            den = den + g1 * g1
            mixed = (w[ip, jp] - w[ip, jm] - w[im, jp] + w[im, jm]) / (4 * h * h)
            q = q + 2 * g0 * g1 * mixed
            den = den + d2
            val = c + dt * (lap - q / den)
            out[i, j] = min(1.0, max(-1.0, val))


@njit(cache=True, nogil=True)
def ls_step_3d(w, out, dt, h, d2):
    m0, m1, m2 = w.shape
    h2 = h * h
    for i in range(m0):
        ip = _refl(i + 1, m0)
        im = _refl(i - 1, m0)
        for j in range(m1):
            jp = _refl(j + 1, m1)
            jm = _refl(j - 1, m1)
            for k in range(m2):
                kp = _refl(k + 1, m2)
                km = _refl(k - 1, m2)
                c = w[i, j, k]
                g0 = (w[ip, j, k] - w[im, j, k]) / (2 * h)
                g1 = (w[i, jp, k] - w[i, jm, k]) / (2 * h)
                g2 = (w[i, j, kp] - w[i, j, km]) / (2 * h)
                s0 = (w[ip, j, k] - 2 * c + w[im, j, k]) / h2
                s1 = (w[i, jp, k] - 2 * c + w[i, jm, k]) / h2
                s2 = (w[i, j, kp] - 2 * c + w[i, j, km]) / h2
                lap = s0 + s1 + s2
                q = g0 * g0 * s0
                den = g0 * g0
                q = q + g1 * g1 * s1
                den = den + g1 * g1
                q = q + g2 * g2 * s2
                den = den + g2 * g2
                m01 = (w[ip, jp, k] - w[ip, jm, k] - w[im, jp, k] + w[im, jm, k]) / (4 * h * h)
                m02 = (w[ip, j, kp] - w[ip, j, km] - w[im, j, kp] + w[im, j, km]) / (4 * h * h)
                m12 = (w[i, jp, kp] - w[i, jp, km] - w[i, jm, kp] + w[i, jm, km]) / (4 * h * h)
                q = q + 2 * g0 * g1 * m01
                q = q + 2 * g0 * g2 * m02
                q = q + 2 * g1 * g2 * m12
                den = den + d2
                val = c + dt * (lap - q / den)
                out[i, j, k] = min(1.0, max(-1.0, val))


def levelset_step(w: np.ndarray, out: np.ndarray, dt: float, grid, delta_reg: float) -> None:
    """Write the clipped forward-Euler update of ``w`` into ``out``."""
    d2 = (delta_reg * grid.h) ** 2
    if w.ndim == 1:
        ls_step_1d(w, out, dt, grid.h, float(grid.n), d2, grid.is_radial)
    elif w.ndim == 2:
        ls_step_2d(w, out, dt, grid.h, float(grid.n), d2, grid.is_radial)
    else:
        ls_step_3d(w, out, dt, grid.h, d2)


@njit(cache=True, nogil=True)
def graph_step_1d(u, out, dt, h, n, L, held, upwind):
    m = u.shape[0]
    h2 = h * h
    for i in range(m):
        if held[i]:
            out[i] = L
            continue
        b = u[1] if i == 0 else u[i - 1]
        f = u[i + 1]
        ur = (f - b) / (2 * h)
        urr = (f - 2 * u[i] + b) / h2
        if i == 0:
            rhs = (n + 1) * urr
        else:
            r = i * h
            diff = 1.0 / (1.0 + ur * ur)
            if upwind and n * h > 2 * r * diff:
                # central advection would give u[i-1] a negative weight
                rhs = urr * diff + n * (f - u[i]) / (h * r)
            else:
                rhs = urr * diff + n * ur / r
        out[i] = min(u[i] + dt * rhs, L)


@njit(cache=True, nogil=True)
def graph_step_2d(u, out, dt, h, L, held):
    m0, m1 = u.shape
    h2 = h * h
    for i in range(m0):
        for j in range(m1):
            if held[i, j]:
                out[i, j] = L
                continue
            c = u[i, j]
            ux = (u[i + 1, j] - u[i - 1, j]) / (2 * h)
            uy = (u[i, j + 1] - u[i, j - 1]) / (2 * h)
            uxx = (u[i + 1, j] - 2 * c + u[i - 1, j]) / h2
            uyy = (u[i, j + 1] - 2 * c + u[i, j - 1]) / h2
            uxy = (u[i + 1, j + 1] - u[i + 1, j - 1] - u[i - 1, j + 1] + u[i - 1, j - 1]) / (4 * h2)
            q = ux * ux * uxx + uy * uy * uyy + 2 * ux * uy * uxy
            rhs = uxx + uyy - q / (1.0 + ux * ux + uy * uy)
            out[i, j] = min(c + dt * rhs, L)


@njit(cache=True, nogil=True)
def graph_step_3d(u, out, dt, h, L, held):
    m0, m1, m2 = u.shape
    h2 = h * h
    for i in range(m0):
        for j in range(m1):
            for k in range(m2):
                if held[i, j, k]:
                    out[i, j, k] = L
                    continue
                c = u[i, j, k]
                gx = (u[i + 1, j, k] - u[i - 1, j, k]) / (2 * h)
                gy = (u[i, j + 1, k] - u[i, j - 1, k]) / (2 * h)
                gz = (u[i, j, k + 1] - u[i, j, k - 1]) / (2 * h)
                sxx = (u[i + 1, j, k] - 2 * c + u[i - 1, j, k]) / h2
                syy = (u[i, j + 1, k] - 2 * c + u[i, j - 1, k]) / h2
                szz = (u[i, j, k + 1] - 2 * c + u[i, j, k - 1]) / h2
                sxy = (u[i + 1, j + 1, k] - u[i + 1, j - 1, k] - u[i - 1, j + 1, k] + u[i - 1, j - 1, k]) / (4 * h2)
                sxz = (u[i + 1, j, k + 1] - u[i + 1, j, k - 1] - u[i - 1, j, k + 1] + u[i - 1, j, k - 1]) / (4 * h2)
                syz = (u[i, j + 1, k + 1] - u[i, j + 1, k - 1] - u[i, j - 1, k + 1] + u[i, j - 1, k - 1]) / (4 * h2)
                q = gx * gx * sxx + gy * gy * syy + gz * gz * szz
                q = q + 2 * (gx * gy * sxy + gx * gz * sxz + gy * gz * syz)
                rhs = sxx + syy + szz - q / (1.0 + gx * gx + gy * gy + gz * gz)
                out[i, j, k] = min(c + dt * rhs, L)


def graph_step(u: np.ndarray, out: np.ndarray, dt: float, grid, L: float, held: np.ndarray, upwind: bool = False) -> None:
    """Capped forward-Euler update; ``held`` must contain every grid-edge node.

    ``upwind`` (Radial1D only) switches ``n u_r / r`` to a forward difference
    at nodes where the central difference is not monotone.
    """
    if u.ndim == 1:
        graph_step_1d(u, out, dt, grid.h, float(grid.n), L, held, upwind)
    elif u.ndim == 2:
        graph_step_2d(u, out, dt, grid.h, L, held)
    else:
        graph_step_3d(u, out, dt, grid.h, L, held)
