import numpy as np
import pytest

from graphmcf import GraphField, Mode, make_grid
from graphmcf.graphflow import CappedProblem, solve_capped


def bowl_profile(r):
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(r < 1, 1.0 / (1.0 - r) + r**2, np.inf)


def bowl_field(h=0.01, extent=2.0, n=1):
    grid = make_grid(Mode.RADIAL1D, h, extent, n)
    return GraphField(grid, bowl_profile(grid.axis(0)))


@pytest.fixture(scope="session")
def small_bowl_run():
    """Bowl datum with L=20, eps=0.05, R=2 up to t=0.1 (snapshots every 0.01)."""
    u0 = bowl_field(h=0.01)
    p = CappedProblem(u0, L=20.0, eps=0.05, R=2.0, T=0.1)
    times = np.arange(1, 10) * 0.01
    return p, solve_capped(p, snap_times=times, probes=np.arange(0, 90, 8))


_CRITERIA: dict[int, str] = {}


@pytest.fixture(scope="session")
def criterion():
    """``record(number, passed, text)`` prints one line and keeps it for the summary."""

    def record(number: int, passed: bool, text: str) -> None:
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {text}"
        _CRITERIA[number] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[k])
