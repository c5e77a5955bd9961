"""Shared explicit time loop: fixed steps, shortened to land on output times."""

from __future__ import annotations

from typing import Iterator, Sequence

import numpy as np


def schedule(
    T: float,
    dt: float,
    snap_every: int | None = None,
    snap_times: Sequence[float] | None = None,
    t0: float = 0.0,
) -> Iterator[tuple[float, float, bool]]:
    """Yield ``(dt_k, t_k, snapshot?)`` for every step from ``t0`` to ``t0 + T``.

    With ``snap_times`` the step is shortened so that every requested time
    is hit exactly; otherwise a snapshot is flagged every ``snap_every``
    steps.  The final step always lands on ``t0 + T`` and is flagged.
    """
    if snap_times is None and (snap_every is None or snap_every < 1):
        raise ValueError("snap_every must be >= 1")
    t_end = t0 + T
    targets = []
    if snap_times is not None:
        targets = sorted({float(s) for s in snap_times if t0 < s < t_end - 1e-12})
    targets.append(t_end)
    idx, k, t = 0, 0, t0
    tol = 1e-9 * dt
    while t < t_end - tol:
        goal = targets[idx] if snap_times is not None else t_end
        step = min(dt, goal - t)
        t_new = t + step
        hit = snap_times is not None and t_new >= goal - tol
        if hit or t_new >= t_end - tol:
            t_new = goal if hit else t_end
        k += 1
        snap = hit or (snap_times is None and k % snap_every == 0) or t_new >= t_end - tol
        if hit:
            idx += 1
            # a remaining gap below tolerance would produce a degenerate step
            while idx < len(targets) - 1 and targets[idx] - t_new <= tol:
                idx += 1
        yield t_new - t, t_new, snap
        t = t_new


def uniform_times(T: float, every: float) -> np.ndarray:
    """Output times ``every, 2 every, ...`` up to and including ``T``."""
    m = int(np.floor(T / every + 1e-9))
    out = list(np.arange(1, m + 1) * every)
    if not out or out[-1] < T - 1e-12:
        out.append(T)
    return np.array(out)
