import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from scipy import optimize

from graphmcf import ESCAPED, GraphField, Mode, make_grid
from graphmcf.graphflow import (
    CappedProblem,
    cap_sweep,
    cfl_dt,
    divergence_rhs,
    domain_projection,
    mcf_rhs,
    solve_capped,
    step,
)
from graphmcf.kernels import graph_step
from graphmcf.oracles import Placement, RoundKind, RoundSolution, barrier_violation

from conftest import bowl_field


def radial(h, extent, n, f):
    g = make_grid(Mode.RADIAL1D, h, extent, n)
    return GraphField(g, f(g.axis(0)))


def test_planes_are_stationary():
    assert_allclose(mcf_rhs(radial(0.1, 1.0, 2, lambda r: 0 * r + 1.5)), 0.0)
    g = make_grid(Mode.CARTESIAN2D, 0.1, 1.0, 1)
    x, y = g.mesh()
    assert_allclose(mcf_rhs(GraphField(g, 3 * x - y + 1))[1:-1, 1:-1], 0.0, atol=1e-12)


def test_rhs_of_paraboloid():
    # u = r^2/2: u_r = r, u_rr = 1, so rhs = 1/(1 + r^2) + n
    u = radial(0.01, 1.0, 1, lambda r: r**2 / 2)
    assert_allclose(mcf_rhs(u)[50], 1 / 1.25 + 1.0, atol=1e-2)
    assert_allclose(mcf_rhs(u)[0], 2.0, atol=1e-12)


def test_cartesian_rhs_matches_divergence_form():
    g = make_grid(Mode.CARTESIAN2D, 0.01, 1.0, 1)
    x, y = g.mesh()
    u = GraphField(g, np.sin(2 * x) * np.cos(y) + x * y)
    inner = (slice(5, -5), slice(5, -5))
    assert_allclose(mcf_rhs(u)[inner], divergence_rhs(u)[inner], atol=1e-3)


def test_cfl_examples():
    assert_allclose(cfl_dt(radial(0.01, 1.0, 1, lambda r: r)), 2e-5)
    g = make_grid(Mode.CARTESIAN2D, 0.05, 1.0, 1)
    assert_allclose(cfl_dt(GraphField(g, np.zeros(g.shape))), 2.5e-4)
    with pytest.raises(ValueError, match="ESCAPED"):
        cfl_dt(GraphField(g, np.full(g.shape, ESCAPED)))


def test_step_rejects_unstable_dt():
    u = radial(0.01, 1.0, 1, lambda r: r)
    with pytest.raises(ValueError, match="stability"):
        step(u, 2 * cfl_dt(u))


def test_cap_is_stationary():
    u = radial(0.01, 1.0, 1, lambda r: 0 * r + 7.0)
    for _ in range(10):
        u = step(u, cfl_dt(u), L=7.0)
    assert_array_equal(u.values, 7.0)


def test_bowl_center_rises_with_rhs():
    u = bowl_field(h=0.01)
    rhs0 = mcf_rhs(u)[0]
    assert rhs0 > 0
    u1 = step(u, cfl_dt(u))
    assert_allclose(u1.values[0] - u.values[0], cfl_dt(u) * rhs0)


def test_graph_stays_above_shrinking_sphere():
    # u(r) = 2 r^2 over r <= 0.8, held at its initial values outside r = 0.6
    u0 = radial(0.01, 0.8, 1, lambda r: 2 * r**2)
    held = u0.grid.axis(0) > 0.6
    sphere = RoundSolution(RoundKind.SPHERE, 2, 0.2)
    place = Placement(0.0, -0.25, "below")
    from graphmcf import Trajectory

    tr = Trajectory()
    tr.append(u0)
    u = u0
    dt = cfl_dt(u0)
    for k in range(1, 1001):
        u = step(u, dt, held=held, held_values=u0.values)
        if k % 100 == 0:
            tr.append(u)
    assert barrier_violation(tr, sphere, place) > 0


def test_numpy_step_and_kernel_agree():
    for scheme in ("central", "monotone"):
        u = bowl_field(h=0.01)
        p = CappedProblem(u, 30.0, 0.05, 2.0, 0.01, scheme=scheme)
        vals = p.initial_field()
        dt = cfl_dt(vals)
        ref = step(vals, dt, L=30.0, held=p.held, scheme=scheme).values
        out = np.empty_like(ref)
        graph_step(np.array(vals.values), out, dt, vals.grid, 30.0, p.held, scheme == "monotone")
        assert_array_equal(out, ref)


def _stencil_range(vals):
    lo = np.minimum(np.minimum(vals[:-2], vals[1:-1]), vals[2:])
    hi = np.maximum(np.maximum(vals[:-2], vals[1:-1]), vals[2:])
    return lo, hi


def test_monotone_scheme_keeps_updates_in_stencil_range():
    rng = np.random.default_rng(3)
    for _ in range(20):
        g = make_grid(Mode.RADIAL1D, 0.01, 0.5, int(rng.integers(1, 4)))
        vals = np.cumsum(rng.uniform(-3, 3, g.shape))  # steep walls of both orientations
        u = GraphField(g, vals)
        new = step(u, cfl_dt(u), scheme="monotone").values
        lo, hi = _stencil_range(vals)
        assert (new[1:-1] >= lo - 1e-12).all() and (new[1:-1] <= hi + 1e-12).all()


def test_central_scheme_overshoots_on_steep_walls():
    # a wall falling outward near the axis: the central n u_r / r term
    # weighs the inner neighbour negatively
    g = make_grid(Mode.RADIAL1D, 0.01, 0.5, 1)
    vals = np.where(g.axis(0) < 0.02, 5.0, 0.0)
    u = GraphField(g, vals)
    new = step(u, cfl_dt(u)).values
    lo, _ = _stencil_range(vals)
    assert (new[1:-1] < lo - 1e-6).any()


def test_monotone_scheme_is_radial_only():
    g = make_grid(Mode.CARTESIAN2D, 0.1, 1.0, 1)
    with pytest.raises(ValueError, match="Radial1D"):
        mcf_rhs(GraphField(g, np.zeros(g.shape)), scheme="monotone")
    with pytest.raises(ValueError, match="unknown scheme"):
        mcf_rhs(radial(0.1, 1.0, 1, lambda r: r), scheme="upwind")


def plane_over_disc(h=0.05):
    g = make_grid(Mode.RADIAL1D, h, 2.0, 1)
    return GraphField(g, np.where(g.axis(0) < 1.0, 0.0, ESCAPED))


def test_plane_run_is_constant_away_from_the_wall():
    # the held cap at the edge of the disc diffuses inward; the center only
    # feels it after the jump has travelled a distance of order sqrt(t)
    u0 = plane_over_disc()
    p = CappedProblem(u0, 5.0, 0.05, 1.5, 0.002)
    tr = solve_capped(p, snap_every=2, monitors=False)
    inside = u0.grid.axis(0) <= 0.5
    assert_array_equal(tr[0].values[inside], 0.0)
    for s in tr:
        assert np.abs(s.values[inside]).max() < 1e-9


def test_bowl_run_minimum_rises_and_boundary_is_capped(small_bowl_run):
    p, tr = small_bowl_run
    mins = [s.values.min() for s in tr]
    assert all(b >= a for a, b in zip(mins, mins[1:]))
    for s in tr:
        assert_array_equal(s.values[p.held], p.L)
        assert s.values.max() <= p.L


def test_capped_problem_validation():
    u0 = bowl_field(h=0.01)
    with pytest.raises(ValueError, match="eps"):
        CappedProblem(u0, 20.0, 0.0, 2.0, 1.0)
    with pytest.raises(ValueError, match="exceeds the grid extent"):
        CappedProblem(u0, 20.0, 0.05, 3.0, 1.0)
    with pytest.raises(ValueError, match="too small"):
        CappedProblem(radial(0.01, 2.0, 1, lambda r: 0 * r), 20.0, 0.05, 1.0, 1.0)
    with pytest.raises(ValueError, match="stability"):
        CappedProblem(u0, 20.0, 0.05, 2.0, 1.0, dt=1e-3)


def test_cap_sweep_is_cauchy_at_the_center():
    u0 = bowl_field(h=0.01)
    res = cap_sweep(u0, [5, 10, 20], 0.05, lambda L: 2.0, 0.05, snap_times=[0.05])
    u5, u10, u20 = res.probe(0, 0.05)
    assert abs(u10 - u20) <= abs(u5 - u10) + 1e-9


def test_cap_sweep_of_plane_is_independent_of_cap():
    u0 = plane_over_disc()
    res = cap_sweep(u0, [5, 10], 0.05, lambda L: 1.5, 0.002, snap_every=2)
    a, b = res.probe(0, 0.002)
    assert a == b == 0.0
    with pytest.raises(ValueError, match="increasing"):
        cap_sweep(u0, [10, 5], 0.05, lambda L: 1.5, 0.05)


def test_domain_projection():
    g = make_grid(Mode.RADIAL1D, 0.01, 2.0, 1)
    assert domain_projection(GraphField(g, np.zeros(g.shape)), 1.0).all()
    u = bowl_field(h=0.01)
    r_star = optimize.brentq(lambda r: 1 / (1 - r) + r * r - 10, 0.0, 0.999)
    assert_array_equal(domain_projection(u, 10.0), g.axis(0) < r_star)
    with pytest.raises(ValueError, match="L-1"):
        domain_projection(u, 20.0, L=20.0)
