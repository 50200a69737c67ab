import math

import numpy as np
import pytest

from metricprobe.quadrature import (RegionSpec, integrate,
                                    integrate_with_estimate)

UNIT_BOX = np.array([[0.0, 1.0]] * 4)


def test_region_validation():
    with pytest.raises(ValueError):
        RegionSpec(box=np.array([[0.0, 1.0]] * 3), resolution=(3, 3, 3, 3))
    with pytest.raises(ValueError):
        RegionSpec(box=np.array([[1.0, 0.0]] + [[0.0, 1.0]] * 3),
                   resolution=(3, 3, 3, 3))
    with pytest.raises(ValueError):
        RegionSpec(box=UNIT_BOX, resolution=(1, 3, 3, 3))
    with pytest.raises(ValueError):
        RegionSpec(box=UNIT_BOX, resolution=(0, 1, 1, 1), rule="gauss-legendre")
    with pytest.raises(ValueError):
        RegionSpec(box=UNIT_BOX, resolution=(3, 3, 3, 3), rule="simpson")
    # scalar resolution broadcasts
    r = RegionSpec(box=UNIT_BOX, resolution=5)
    assert r.resolution == (5, 5, 5, 5)


def test_refine_coarsen_round_trip():
    r = RegionSpec(box=UNIT_BOX, resolution=(9, 17, 5, 3))
    f = r.refined()
    assert f.resolution == (17, 33, 9, 5)
    assert f.coarsened().resolution == r.resolution
    g = RegionSpec(box=UNIT_BOX, resolution=(2, 4, 1, 8), rule="gauss-legendre")
    assert g.refined().resolution == (4, 8, 2, 16)
    assert g.refined().coarsened().resolution == g.resolution


def test_scaled_resolution():
    r = RegionSpec(box=UNIT_BOX, resolution=(17, 17, 9, 9))
    assert r.scaled(2.0).resolution == (33, 33, 17, 17)
    assert r.scaled(0.5).resolution == (9, 9, 5, 5)
    assert r.scaled(0.01).resolution == (2, 2, 2, 2)
    with pytest.raises(ValueError):
        r.scaled(0.0)


def test_trapezoid_exact_on_multilinear():
    r = RegionSpec(box=UNIT_BOX, resolution=3)
    val = integrate(lambda p: 2.0 + p[..., 0] - 3.0 * p[..., 3], r)
    assert math.isclose(val, 2.0 + 0.5 - 1.5, rel_tol=1e-14)


def test_trapezoid_volume_of_box():
    box = np.array([[0.0, 2.0], [1.0, 4.0], [-1.0, 1.0], [0.0, 0.5]])
    r = RegionSpec(box=box, resolution=(4, 3, 5, 2))
    val = integrate(lambda p: np.ones(p.shape[:-1]), r)
    assert math.isclose(val, 2.0 * 3.0 * 2.0 * 0.5, rel_tol=1e-14)


def test_gauss_legendre_exact_on_degree_seven():
    r = RegionSpec(box=UNIT_BOX, resolution=1, rule="gauss-legendre")
    val = integrate(lambda p: p[..., 0] ** 7, r)
    assert math.isclose(val, 0.125, rel_tol=1e-13)
    val = integrate(lambda p: p[..., 1] ** 3 * p[..., 2] ** 4, r)
    assert math.isclose(val, 0.25 * 0.2, rel_tol=1e-13)


def test_trapezoid_second_order_on_generic_smooth_integrand():
    exact = (1.0 - math.cos(1.0)) * 1.0
    errs = []
    for n in (5, 9, 17):
        r = RegionSpec(box=UNIT_BOX, resolution=(n, 2, 2, 2))
        errs.append(abs(integrate(lambda p: np.sin(p[..., 0]), r) - exact))
    assert 3.5 <= errs[0] / errs[1] <= 4.5
    assert 3.5 <= errs[1] / errs[2] <= 4.5


def test_error_estimate_bounds_true_error():
    # compactly supported smooth bump: trapezoid converges fast, and the
    # |fine - coarse| estimate stays above the true fine-grid error
    def bump(p):
        u = 2.0 * p[..., 0] - 1.0
        out = np.zeros_like(u)
        m = np.abs(u) < 1.0
        out[m] = np.exp(-1.0 / (1.0 - u[m] ** 2))
        return out

    exact_r = RegionSpec(box=UNIT_BOX, resolution=(257, 2, 2, 2))
    exact = integrate(bump, exact_r)
    r = RegionSpec(box=UNIT_BOX, resolution=(17, 2, 2, 2))
    val, est = integrate_with_estimate(bump, r)
    assert abs(val - exact) <= est
    assert est < 1e-2


def test_integrate_with_estimate_returns_fine_value():
    r = RegionSpec(box=UNIT_BOX, resolution=(9, 9, 3, 3))
    fn = lambda p: np.cos(p[..., 0] * p[..., 1])
    val, est = integrate_with_estimate(fn, r)
    assert val == integrate(fn, r)
    assert est >= 0.0


def test_integration_deterministic():
    r = RegionSpec(box=UNIT_BOX, resolution=(9, 9, 9, 9))
    fn = lambda p: np.exp(-np.sum(p ** 2, axis=-1))
    assert integrate(fn, r) == integrate(fn, r)
