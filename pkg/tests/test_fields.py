import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from scipy import optimize

from graphmcf import ESCAPED, GraphField, LevelSetField, Mode, Trajectory, make_grid, zero_crossings
from graphmcf.fields import escaped_region

from conftest import bowl_field


def test_radial_grid_nodes():
    g = make_grid(Mode.RADIAL1D, 0.01, 2.0, 1)
    r = g.axis(0)
    assert g.shape == (201,)
    assert r[0] == 0.0
    assert_allclose(r[-1], 2.0)


def test_cartesian2d_rejects_n2():
    with pytest.raises(ValueError, match="n = 1"):
        make_grid(Mode.CARTESIAN2D, 0.05, 3.0, 2)


def test_axisym_grid_shape_and_box():
    g = make_grid(Mode.AXISYM2D, 0.02, 1.5, 2)
    r, z = g.axes
    assert g.shape == (76, 151)
    assert_allclose([r[0], r[-1], z[0], z[-1]], [0.0, 1.5, -1.5, 1.5])


@pytest.mark.parametrize("h, extent", [(0.0, 1.0), (0.1, 0.25), (0.1, 1.05)])
def test_make_grid_rejects_bad_spacing(h, extent):
    with pytest.raises(ValueError):
        make_grid(Mode.RADIAL1D, h, extent, 1)


def test_cartesian_axes_are_symmetric():
    g = make_grid("Cartesian3D", 0.1, (1.0, 0.5, 1.5), 2)
    assert g.shape == (21, 11, 31)
    assert_allclose(g.radius()[10, 5, 15], 0.0)
    assert_allclose(g.axis(1)[[0, -1]], [-0.5, 0.5])


def test_zero_crossing_of_linear_data():
    r = np.arange(11) * 0.1
    assert_allclose(zero_crossings((r, r - 0.5)), [0.5])


def test_no_crossing_for_constant_field():
    g = make_grid(Mode.RADIAL1D, 0.1, 1.0, 1)
    assert zero_crossings(LevelSetField(g, -np.ones(g.shape))) == []


def test_zero_crossing_of_parabola():
    r = np.arange(101) * 0.01
    (root,) = zero_crossings((r, r**2 - 0.25))
    assert abs(root - 0.5) <= 0.01


def test_zero_crossings_on_axisym_midline():
    g = make_grid(Mode.AXISYM2D, 0.05, (1.0, 0.5), 1)
    R, Z = g.mesh()
    w = LevelSetField(g, np.clip(np.hypot(R, Z) - 0.6, -1, 1))
    assert_allclose(zero_crossings(w), [0.6], atol=1e-12)


def test_escaped_region_trivial_cases():
    g = make_grid(Mode.RADIAL1D, 0.1, 1.0, 1)
    assert not escaped_region(GraphField(g, np.zeros(g.shape)), 1.0).any()
    assert escaped_region(GraphField(g, np.full(g.shape, ESCAPED)), 1.0).all()


def test_escaped_region_of_bowl_datum():
    u = bowl_field(h=0.01)
    r_star = optimize.brentq(lambda r: 1 / (1 - r) + r * r - 10, 0.0, 0.999)
    assert_array_equal(escaped_region(u, 10.0), u.grid.axis(0) >= r_star)


def test_fields_validate_values():
    g = make_grid(Mode.RADIAL1D, 0.1, 1.0, 1)
    with pytest.raises(ValueError, match="NaN"):
        GraphField(g, np.full(g.shape, np.nan))
    with pytest.raises(ValueError, match=r"\[-1, 1\]"):
        LevelSetField(g, np.full(g.shape, 2.0))
    with pytest.raises(ValueError, match="shape"):
        GraphField(g, np.zeros(3))
    u = GraphField(g, np.zeros(g.shape))
    with pytest.raises(ValueError):
        u.values[0] = 1.0


def test_trajectory_requires_increasing_times_on_one_grid():
    g = make_grid(Mode.RADIAL1D, 0.1, 1.0, 1)
    tr = Trajectory()
    tr.append(GraphField(g, np.zeros(g.shape), 0.0))
    tr.append(GraphField(g, np.ones(g.shape), 0.5))
    with pytest.raises(ValueError, match="not after"):
        tr.append(GraphField(g, np.ones(g.shape), 0.5))
    other = make_grid(Mode.RADIAL1D, 0.05, 1.0, 1)
    with pytest.raises(ValueError, match="one grid"):
        tr.append(GraphField(other, np.zeros(other.shape), 1.0))
    assert tr.nearest(0.4).time == 0.5
    assert_allclose(tr.times, [0.0, 0.5])
