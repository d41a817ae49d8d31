import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shockbundle.geometry import (
    GeometryError,
    Hyperplane,
    Polyline,
    Ray,
    Sphere,
    min_separation,
    param_rows,
    ray_intersect,
    surface_normal,
    surface_point,
)

from conftest import plane

R2 = 1.0 / np.sqrt(2.0)


def test_surface_points():
    g1 = plane(0.0)
    np.testing.assert_array_equal(surface_point(g1, [0.0]), [0.0, 0.0])
    np.testing.assert_array_equal(surface_point(g1, [1.0]), [1.0, -1.0])
    np.testing.assert_allclose(surface_point(Sphere([0.0, 0.0], 1.0), [0.0]), [1.0, 0.0])
    with pytest.raises(GeometryError):
        surface_point(g1, [3.0])


def test_ray_examples():
    g2 = plane(2.0)
    assert ray_intersect(g2, Ray(np.zeros(2), np.array([1.0, 1.0]))) == pytest.approx(1.0, abs=1e-15)
    assert ray_intersect(g2, Ray(np.zeros(2), np.array([-1.0, -1.0]))) is None
    # origin on the surface: lambda = 0 is rejected
    assert ray_intersect(g2, Ray(np.ones(2), np.array([1.0, 1.0]))) is None


def test_ray_circle():
    c = Sphere([0.0, 0.0], 2.0)
    lam = ray_intersect(c, Ray(np.zeros(2), np.array([0.6, 0.8])))
    assert lam == pytest.approx(2.0, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    st.floats(-2, 2), st.floats(-2, 2), st.floats(0.1, 3), st.floats(0.1, 3), st.floats(0.5, 4)
)
def test_ray_matches_closed_form(o1, o2, d1, d2, offset):
    surf = Hyperplane([offset, 0.0], [[-0.3, 1.0]], [1.0, 0.3])
    origin, direction = np.array([o1, o2]), np.array([d1, d2])
    lam = ray_intersect(surf, Ray(origin, direction), lam_max=200.0)
    exact = surf.ray_closed_form(origin, direction)
    if exact is not None and 1e-9 < exact < 199.0:
        assert lam is not None
        assert abs(lam - exact) <= 1e-12 * max(1.0, exact)
        assert abs(surf.g(origin + lam * direction)) <= 1e-12 * max(1.0, exact)
    elif exact is not None and exact < -1e-9:
        assert lam is None


def test_normals():
    np.testing.assert_allclose(surface_normal(plane(0.0), [0.0, 0.0]), [R2, R2], atol=1e-12)
    np.testing.assert_allclose(surface_normal(plane(2.0), [1.0, 1.0]), [R2, R2], atol=1e-12)
    np.testing.assert_allclose(surface_normal(Sphere([0.0, 0.0], 1.0), [1.0, 0.0]), [1.0, 0.0], atol=1e-9)
    with pytest.raises(GeometryError):
        surface_normal(plane(0.0), [1.0, 1.0])


def test_unit_normal_sphere():
    s = Sphere([0.5, -0.2, 1.0], 1.5)
    pts = s.chi(s.samples(5))
    n = surface_normal(s, pts)
    np.testing.assert_allclose(np.linalg.norm(n, axis=1), 1.0, atol=1e-12)


def test_polyline_signed_distance():
    p = Polyline([0.0, 1.0, 2.0], [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    assert p.g(np.array([0.5, 1.0])) == pytest.approx(1.0)
    assert p.g(np.array([1.5, -2.0])) == pytest.approx(-2.0)
    np.testing.assert_allclose(p.chi(np.array([[0.5]])), [[0.5, 0.0]])
    lam = ray_intersect(p, Ray(np.array([0.5, -1.0]), np.array([0.0, 1.0])))
    assert lam == pytest.approx(1.0, abs=1e-12)


def test_separation_and_validation():
    assert min_separation(plane(0.0), plane(2.0)) == pytest.approx(np.sqrt(2.0), rel=1e-12)
    with pytest.raises(GeometryError):
        Hyperplane([0.0, 0.0], [[1.0, 1.0]], [1.0, 1.0])
    with pytest.raises(GeometryError):
        Ray(np.zeros(2), np.zeros(2))


def test_param_rows():
    assert param_rows([], 0).shape == (1, 0)
    assert param_rows(np.zeros((4, 0)), 0).shape == (4, 0)
    assert param_rows([1.0, 2.0], 1).shape == (2, 1)
