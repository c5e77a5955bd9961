"""Runtime monitors for the gradient, curvature and time-Hoelder estimates.

All quantities are evaluated in the shifted frame ``u - a`` so that the
region of interest is ``{u < a}``.  Monitors never raise on bad data; an
empty region or an invalid constant is reported as ``None``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .fields import GraphField, Trajectory
from .geometry import g_from, gradient_function, second_fundamental_norm

log = logging.getLogger(__name__)

HOLDER_SLACK = 0.05


@dataclass(frozen=True)
class MonitorRecord:
    time: float
    c1_value: float | None
    c2_value: float | None
    holder_worst: float
    grad_bound: float | None
    a_used: float
    k_used: float
    lambda_used: float
    M_used: float
    flags: tuple = ()


@dataclass(frozen=True)
class HolderResult:
    worst: float
    bound: float
    pairs: int
    M: float

    @property
    def passed(self) -> bool:
        return self.worst <= self.bound * (1 + HOLDER_SLACK)


def _region(u: GraphField, v: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return mask & np.isfinite(u.values) & np.isfinite(v)


def c1_monitor(u: GraphField, a: float, v: np.ndarray | None = None) -> float | None:
    """``max v (u - a)^2`` over ``{u < a}``; ``None`` when the region is empty."""
    v = gradient_function(u) if v is None else v
    with np.errstate(invalid="ignore"):
        m = _region(u, v, u.values < a)
    if not m.any():
        return None
    return float(np.max(v[m] * (u.values[m] - a) ** 2))


def c2_monitor(
    u: GraphField,
    t: float,
    a: float,
    k: float,
    lam: float,
    v: np.ndarray | None = None,
    A2: np.ndarray | None = None,
) -> float | None:
    """``sup t (u-a)^4 G + lam (u-a)^2 v^2`` over ``{u < a}``.

    Returns ``None`` when the region is empty or ``k v^2 > 1/2`` somewhere in it.
    """
    if not 0 <= t <= 1:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    v = gradient_function(u) if v is None else v
    A2 = second_fundamental_norm(u) if A2 is None else A2
    with np.errstate(invalid="ignore"):
        m = _region(u, v, u.values < a) & np.isfinite(A2)
    if not m.any():
        return None
    G, valid = g_from(v, A2, k)
    if not valid[m].all():
        log.warning("k=%g violates k v^2 <= 1/2 in {u < %g}", k, a)
        return None
    s = u.values[m] - a
    return float(np.max(t * s**4 * G[m] + lam * s**2 * v[m] ** 2))


def gradient_bound(u: GraphField, a: float, v: np.ndarray | None = None) -> float | None:
    """``max v`` over ``{u <= a - 1}``; ``None`` when the region is empty."""
    v = gradient_function(u) if v is None else v
    with np.errstate(invalid="ignore"):
        m = _region(u, v, u.values <= a - 1)
    if not m.any():
        return None
    return float(np.max(v[m]))


def default_k(vmax2: float) -> float:
    """``0.9 / (3 max v^2)``, a strict version of ``k v^2 <= 1/3``."""
    return 0.9 / (3.0 * vmax2)


def gradient_M(traj: Trajectory, a: float) -> float:
    """Largest ``v`` over ``{u <= a}`` across all snapshots, at least 1."""
    M = 1.0
    for s in traj:
        v = gradient_function(s)
        with np.errstate(invalid="ignore"):
            m = _region(s, v, s.values <= a)
        if m.any():
            M = max(M, float(v[m].max()))
    return M


def _series(traj: Trajectory, probes):
    """Times and a (samples x probes) value matrix: dense probe history if recorded, else snapshots."""
    if "probe_values" in traj.info and probes is None:
        return np.asarray(traj.info["probe_times"]), np.asarray(traj.info["probe_values"]), True
    vals = [np.asarray(s.values).ravel() for s in traj]
    if probes is not None:
        probes = np.asarray(probes)
        idx = np.flatnonzero(probes.ravel()) if probes.dtype == bool else probes.ravel()
        vals = [x[idx] for x in vals]
    return traj.times, np.array(vals), False


def _holder_quotients(times, U, a, window, dense):
    """Per admissible sample pair: the later time and the worst quotient over probes."""
    S = len(times)
    lags = []
    lag = 1
    while lag < S:
        lags.append(lag)
        lag = lag * 2 if dense else lag + 1
    t_out, q_out, pairs = [], [], 0
    for lag in lags:
        dt = times[lag:] - times[:-lag]
        ok = dt < window
        if not ok.any():
            if dense:
                break
            continue
        u1, u2 = U[:-lag][ok], U[lag:][ok]
        with np.errstate(invalid="ignore"):
            m = np.isfinite(u1) & np.isfinite(u2) & ((u1 - a <= -1) | (u2 - a <= -1))
            q = np.where(m, np.abs(u1 - u2), 0.0) / np.sqrt(dt[ok])[:, None]
        rows = m.any(axis=1)
        pairs += int(m.sum())
        t_out.append(times[lag:][ok][rows])
        q_out.append(q[rows].max(axis=1))
    if not t_out:
        return np.empty(0), np.empty(0), 0
    return np.concatenate(t_out), np.concatenate(q_out), pairs


def _quotients_for(traj, probes, a, window):
    dense = "probe_values" in traj.info and probes is None
    if not dense and (len(traj) < 2 or window <= np.min(np.diff(traj.times))):
        return np.empty(0), np.empty(0), 0
    times, U, dense = _series(traj, probes)
    return _holder_quotients(times, U, a, window, dense)


def holder_check(
    traj: Trajectory,
    probes=None,
    a: float = 0.0,
    M: float | None = None,
) -> HolderResult:
    """Worst ``|u(x,t1) - u(x,t2)| / sqrt|t1 - t2|`` over admissible pairs.

    A pair is admissible when ``|t1 - t2| < 1/(8(n+1)M^2)`` and ``u - a <= -1``
    at one of the two times.  Samples come from the per-step probe history
    recorded by the solver when present (pairs at lags 1, 2, 4, ... steps),
    otherwise from the snapshots at ``probes`` (every pair).  ``M`` defaults
    to the largest ``v`` on ``{u <= a}`` over the run, at least 1.  The
    bound is ``sqrt(2(n+1)) (M + 1)``.
    """
    n = traj.grid.n
    M = gradient_M(traj, a) if M is None else max(float(M), 1.0)
    window = 1.0 / (8 * (n + 1) * M**2)
    bound = np.sqrt(2 * (n + 1)) * (M + 1)
    t_late, q, pairs = _quotients_for(traj, probes, a, window)
    worst = float(q.max()) if q.size else 0.0
    return HolderResult(worst, float(bound), pairs, M)


def record_monitors(traj: Trajectory, a: float) -> list[MonitorRecord]:
    """One :class:`MonitorRecord` per snapshot.

    ``k`` and ``lambda`` are fixed over the run: ``k = 0.9/(3 max v^2)`` and
    ``lambda = 2 max (u-a)^2``, both maxima over ``{u < a}`` and all
    snapshots.  ``holder_worst`` is cumulative up to each snapshot.
    """
    geo = []
    vmax2, smax2 = 1.0, 0.0
    for s in traj:
        v = gradient_function(s)
        A2 = second_fundamental_norm(s)
        geo.append((v, A2))
        with np.errstate(invalid="ignore"):
            m = _region(s, v, s.values < a)
        if m.any():
            vmax2 = max(vmax2, float(np.max(v[m] ** 2)))
            smax2 = max(smax2, float(np.max((s.values[m] - a) ** 2)))
    k = default_k(vmax2)
    lam = 2.0 * smax2
    M = gradient_M(traj, a)
    n = traj.grid.n
    window = 1.0 / (8 * (n + 1) * M**2)
    t_late, q, _ = _quotients_for(traj, None, a, window)
    out = []
    for s, (v, A2) in zip(traj, geo):
        flags = []
        upto = q[t_late <= s.time + 1e-12]
        running = float(upto.max()) if upto.size else 0.0
        c1 = c1_monitor(s, a, v)
        if c1 is None:
            flags.append("c1_empty")
        c2 = None
        if s.time <= 1:
            c2 = c2_monitor(s, s.time, a, k, lam, v, A2)
            if c2 is None:
                flags.append("c2_invalid")
        else:
            flags.append("c2_out_of_range")
        gb = gradient_bound(s, a, v)
        if gb is None:
            flags.append("grad_empty")
        out.append(MonitorRecord(float(s.time), c1, c2, running, gb, float(a), k, lam, M, tuple(flags)))
    return out


def c1_nonincreasing(records: list[MonitorRecord], slack: float = 0.01) -> tuple[bool, float]:
    """Check ``c1(t_j) <= (1 + slack) c1(t_i)`` for ``t_i < t_j``; returns (pass, worst ratio)."""
    vals = [r.c1_value for r in records if r.c1_value is not None]
    worst = 0.0
    running = np.inf
    for c in vals:
        if np.isfinite(running) and running > 0:
            worst = max(worst, c / running)
        running = min(running, c) if np.isfinite(running) else c
    return worst <= 1 + slack, worst


def gradient_bound_holds(records: list[MonitorRecord]) -> tuple[bool, float]:
    """``grad_bound(t) <= c1(0)`` at every snapshot; returns (pass, worst ratio)."""
    if not records or records[0].c1_value is None:
        return True, 0.0
    c10 = records[0].c1_value
    worst = max((r.grad_bound / c10 for r in records if r.grad_bound is not None), default=0.0)
    return worst <= 1.0, worst


def c2_envelope(records: list[MonitorRecord]) -> tuple[float, float]:
    """Fit ``c2(t) <= c2(0+) + C t`` and return ``(c2(0+), C)``.

    ``C`` is the smallest slope making the line an upper envelope of the
    recorded values for ``t`` in ``(0, 1]``.
    """
    pts = [(r.time, r.c2_value) for r in records if r.c2_value is not None and 0 < r.time <= 1]
    if not pts:
        raise ValueError("no c2 values in (0, 1]")
    t, c = map(np.asarray, zip(*pts))
    base = c[0]
    slope = float(np.max(np.maximum(c - base, 0.0) / t))
    return float(base), slope
