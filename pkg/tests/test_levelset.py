import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from graphmcf import Label, LevelSetField, Mode, make_grid
from graphmcf.levelset import (
    Annulus,
    Ball,
    Capsule,
    Cylinder,
    LevelSetProblem,
    RadialGraph,
    Union,
    Verdict,
    count_components,
    fattening_measure,
    levelset_cfl,
    levelset_rhs,
    measure_theoretic_sets,
    solve_levelset,
    step_levelset,
    truncated_signed_distance,
)


def test_ball_distance_in_axisym_grid():
    g = make_grid(Mode.AXISYM2D, 0.05, 1.0, 1)
    w = truncated_signed_distance(Ball(0.5), g).values
    assert_allclose(w[14, 20], 0.2)  # (r, z) = (0.7, 0)
    assert_allclose(w[0, 20], -0.5)


def test_plane_graph_distance():
    g = make_grid(Mode.AXISYM2D, 0.05, 1.0, 1)
    w = truncated_signed_distance(RadialGraph(lambda r: 0 * np.asarray(r)), g, Label.W_GRAPH).values
    assert_allclose(w[3, 26], -0.3, atol=1e-6)  # z = 0.3 above the plane
    assert_allclose(w[3, 14], 0.3, atol=1e-6)
    assert_allclose(w[3, 0], 1.0)  # clamped


def test_annulus_distance():
    g = make_grid(Mode.RADIAL1D, 0.05, 1.5, 1)
    w = truncated_signed_distance(Annulus(0.3, 1.0), g).values
    assert_allclose(w[13], -0.35)
    assert_allclose(w[0], 0.3)


def test_dumbbell_union_is_connected():
    g = make_grid(Mode.CARTESIAN2D, 0.02, 1.5, 1)
    shape = Union((Ball(0.5, (-0.7, 0.0)), Ball(0.5, (0.7, 0.0)), Capsule((-0.7, 0.0), (0.7, 0.0), 0.15)))
    w = truncated_signed_distance(shape, g).values
    assert count_components(w < 0) == 1
    assert_allclose(w[75, 75], -0.15)


def test_linear_function_is_stationary():
    g = make_grid(Mode.CARTESIAN2D, 0.05, 1.0, 1)
    x, y = g.mesh()
    w = LevelSetField(g, 0.3 * x - 0.4 * y)
    assert_allclose(levelset_rhs(w)[1:-1, 1:-1], 0.0, atol=1e-12)


@pytest.mark.parametrize("mode, n", [(Mode.RADIAL1D, 1), (Mode.RADIAL1D, 2), (Mode.CARTESIAN2D, 1)])
def test_distance_to_sphere_moves_by_mean_curvature(mode, n):
    # w = |x| - rho in R^m, m = n + 1: rhs = (m - 1)/|x| where |Dw| = 1
    h, rho = 0.01, 0.5
    g = make_grid(mode, h, 1.0, n)
    w = LevelSetField(g, np.clip(g.radius() - rho, -1, 1))
    rhs = levelset_rhs(w)
    near = np.abs(g.radius() - rho) < 0.5 * h + 1e-12
    assert near.any()
    assert_allclose(rhs[near], n / g.radius()[near], rtol=1e-3)


def test_regularization_at_critical_point():
    g = make_grid(Mode.CARTESIAN2D, 0.05, 1.0, 1)
    x, y = g.mesh()
    w = LevelSetField(g, 0.5 - 0.25 * (x**2 + y**2))
    assert_allclose(levelset_rhs(w)[20, 20], -1.0)  # the full Laplacian


def test_cylinder_data_stay_z_independent():
    g = make_grid(Mode.AXISYM2D, 0.02, (1.0, 0.4), 1)
    w = truncated_signed_distance(Cylinder(Ball(0.6)), g)
    for _ in range(100):
        w = step_levelset(w, levelset_cfl(g))
    assert np.ptp(w.values, axis=1).max() == 0.0


def test_constant_one_is_stationary():
    g = make_grid(Mode.AXISYM2D, 0.05, 1.0, 1)
    w = LevelSetField(g, np.ones(g.shape))
    assert_array_equal(step_levelset(w, levelset_cfl(g)).values, 1.0)
    tr = solve_levelset(LevelSetProblem(w, 0.05), snap_every=5)
    assert all((s.values == 1.0).all() for s in tr)


def test_cfl_and_problem_validation():
    g = make_grid(Mode.RADIAL1D, 0.01, 1.0, 1)
    assert_allclose(levelset_cfl(g), 2e-5)
    assert_allclose(levelset_cfl(make_grid(Mode.AXISYM2D, 0.01, 1.0, 2)), 0.4e-4 / 6)
    w = truncated_signed_distance(Ball(0.5), g)
    with pytest.raises(ValueError, match="stability"):
        LevelSetProblem(w, 1.0, dt=1e-3)
    with pytest.raises(ValueError, match="delta_reg"):
        LevelSetProblem(w, 1.0, delta_reg=0.0)


def test_planar_dumbbell_stays_connected_and_loses_area_at_two_pi():
    # curves in the plane never pinch; the enclosed area drops at rate 2 pi
    h = 0.02
    g = make_grid(Mode.CARTESIAN2D, h, 1.5, 1)
    shape = Union((Ball(0.5, (-0.7, 0.0)), Ball(0.5, (0.7, 0.0)), Capsule((-0.7, 0.0), (0.7, 0.0), 0.15)))
    tr = solve_levelset(LevelSetProblem(truncated_signed_distance(shape, g), 0.2), snap_every=200,
                        fattening=False)
    assert all(count_components(s.values < 0) == 1 for s in tr)
    times = np.array([s.time for s in tr])
    area = np.array([(s.values < 0).sum() * h**2 for s in tr])
    slope = np.polyfit(times, area, 1)[0]
    assert_allclose(slope, -2 * np.pi, rtol=0.05)


def test_fattening_of_exact_sphere_distance():
    g = make_grid(Mode.CARTESIAN2D, 0.01, 1.0, 1)
    w = LevelSetField(g, np.clip(g.radius() - 0.5, -1, 1))
    rep = fattening_measure(w, band=0.03)
    assert rep.verdict is Verdict.NONFAT
    assert_allclose(rep.band_measure, 2 * np.pi * 0.5 * 2 * 0.03, rtol=0.05)
    half = fattening_measure(w, band=0.015)
    assert_allclose(half.band_measure / rep.band_measure, 0.5, rtol=0.2)


def test_fattening_of_flat_slab_and_of_empty_band():
    g = make_grid(Mode.CARTESIAN2D, 0.01, 1.0, 1)
    x, _ = g.mesh()
    slab = LevelSetField(g, np.where(np.abs(x) < 0.3, 0.0, np.clip(np.abs(x) - 0.3, 0, 1)))
    assert fattening_measure(slab).verdict is Verdict.SUSPICIOUS
    rep = fattening_measure(LevelSetField(g, np.ones(g.shape)))
    assert rep.band_measure == 0.0 and rep.verdict is Verdict.NONFAT


def test_line_grids_use_a_wider_band():
    g = make_grid(Mode.RADIAL1D, 0.02, 2.0, 1)
    for rho in np.linspace(0.5, 1.0, 11):
        w = LevelSetField(g, np.clip(g.radius() - rho, -1, 1))
        rep = fattening_measure(w)
        assert rep.band_width == pytest.approx(0.2)
        assert rep.verdict is Verdict.NONFAT


def test_measure_theoretic_sets():
    h = 0.01
    g = make_grid(Mode.CARTESIAN2D, h, 1.0, 1)
    x, _ = g.mesh()
    inner, bd = measure_theoretic_sets(np.ones(g.shape, bool), 3 * h, h)
    assert inner.all() and not bd.any()
    inner, bd = measure_theoretic_sets(x < 0, 3 * h, h)
    assert_array_equal(bd, np.abs(x + h / 2) < 3 * h)
    inner, bd = measure_theoretic_sets(g.radius() < 0.5, 3 * h, h)
    expected = 2 * np.pi * 0.5 * 2 * 3 * h / h**2
    assert_allclose(bd.sum(), expected, rtol=0.1)
    with pytest.raises(ValueError):
        measure_theoretic_sets(x < 0, h, h)
