import numpy as np
import pytest
from numpy.testing import assert_allclose

from graphmcf import Mode, make_grid
from graphmcf.convergence import (
    RefinementStudy,
    cap_spatial_study,
    hemisphere_cap,
    sphere_levelset,
    sphere_spatial_study,
)


def test_orders_of_a_refinement_study():
    s = RefinementStudy((0.1, 0.05, 0.025), (4.0, 1.0, 0.25))
    assert_allclose(s.orders, (2.0, 2.0))
    assert s.order == 2.0


def test_hemisphere_cap():
    # sphere S^2 in R^3 (n = 1): rho^2 = 1 - 4t
    assert_allclose(hemisphere_cap([0.0, 0.6], 0.0, 1.0, 1), [-1.0, -0.8])
    assert_allclose(hemisphere_cap([0.0], 0.1, 1.0, 1), [-np.sqrt(0.6)])
    with pytest.raises(ValueError):
        hemisphere_cap([0.9], 0.1, 1.0, 1)
    with pytest.raises(ValueError, match="collapsed"):
        hemisphere_cap([0.0], 0.3, 1.0, 1)


def test_sphere_levelset_function():
    g = make_grid(Mode.RADIAL1D, 0.1, 1.0, 1)
    w = sphere_levelset(g, 0.5)
    assert_allclose(w.values[5], 0.0, atol=1e-15)
    assert_allclose(w.values[0], -0.25)
    with pytest.raises(ValueError, match="extent"):
        sphere_levelset(make_grid(Mode.RADIAL1D, 0.1, 3.0, 1), 0.5)


def test_coarse_studies_are_second_order_in_space():
    cap = cap_spatial_study(h0=0.05, levels=2, T=0.02)
    assert cap.errors[1] < cap.errors[0]
    assert cap.order > 1.7
    sph = sphere_spatial_study(h0=0.04, levels=2, T=0.02, samples=5)
    assert sph.order > 1.7
