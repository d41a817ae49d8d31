import numpy as np
import pytest

from shockbundle.initial_data import PiecewiseField, Region, classify_region, classify_regions, eval_initial


def test_regions(bundle_a):
    assert classify_region(bundle_a, [-1.0, -1.0]) is Region.MINUS
    assert classify_region(bundle_a, [1.0, 0.0]) is Region.ZERO
    assert classify_region(bundle_a, [2.0, 2.0]) is Region.PLUS


def test_values(bundle_a):
    field = PiecewiseField(bundle_a)
    assert eval_initial(field, [-1.0, -1.0]) == 2.0
    assert eval_initial(field, [0.5, 0.5]) == pytest.approx(1.5, abs=1e-12)
    assert eval_initial(field, [2.0, 2.0]) == 1.0
    assert field.value_range == (1.0, 2.0)


def test_partition_and_exact_values(bundle_a):
    g = np.linspace(-3.0, 4.0, 41)
    x = np.stack(np.meshgrid(g, g, indexing="ij"), -1).reshape(-1, 2)
    reg, lateral = classify_regions(bundle_a, x, return_lateral=True)
    assert set(np.unique(reg)) <= {-1, 0, 1}
    xi = x.sum(axis=1)
    expect = np.where(xi < 0, -1, np.where(xi > 2, 1, 0))
    seam = (np.abs(xi) < 1e-9) | (np.abs(xi - 2) < 1e-9)
    np.testing.assert_array_equal(reg[~seam], expect[~seam])
    u = PiecewiseField(bundle_a)(x)
    exact = np.clip(2.0 - xi / 2, 1.0, 2.0)
    np.testing.assert_allclose(u, exact, atol=1e-9)


def test_monotone_along_trajectory(bundle_a_exp):
    b = bundle_a_exp
    field = PiecewiseField(b)
    s = np.array([[0.4]])
    K = float(b.K(s)[0])
    tau = np.linspace(0.05, 0.95, 10) * float(b.tau0(s)[0])
    x = b.X(tau, np.repeat(s, 10, axis=0))
    u = field(x)
    np.testing.assert_allclose(np.diff(u) / np.diff(tau), -K, atol=1e-8)


def test_lateral_points_counted(bundle_a):
    # x1 + x2 = 1 lies in the band, but its trajectory starts at s = 9.5
    reg, lateral = classify_regions(bundle_a, np.array([[10.0, -9.0], [0.5, 0.5]]), return_lateral=True)
    np.testing.assert_array_equal(reg, [0, 0])
    np.testing.assert_array_equal(lateral, [True, False])
