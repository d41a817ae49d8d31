import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shockbundle.flux import exponential, quadratic
from shockbundle.geometry import Hyperplane
from shockbundle.profile import (
    K_slope,
    ProfileError,
    build_bundle,
    bundle_point,
    bundle_points,
    eval_u1,
    invert_point,
    solve_u1_1d,
    transport_residual,
)

from conftest import plane, scenario_a


def test_scenario_a_tables(bundle_a):
    assert len(bundle_a.s_samples) == 33
    np.testing.assert_allclose(bundle_a.K_table, 1.0, atol=1e-10)
    np.testing.assert_allclose(bundle_a.tau0_table, 1.0, atol=1e-10)
    np.testing.assert_allclose(bundle_a.K_table * bundle_a.tau0_table, 1.0, atol=1e-14)
    np.testing.assert_array_equal(bundle_a.d, [1.0, 1.0])


def test_far_gamma2():
    b = scenario_a(offset2=4.0)
    np.testing.assert_allclose(b.K_table, 0.5, atol=1e-10)
    np.testing.assert_allclose(b.tau0_table, 2.0, atol=1e-10)
    assert abs(transport_residual(b, [1.0, 1.0])) < 1e-7


def test_swapped_states_miss():
    f = quadratic(1.0, 1.0, interval=(0.0, 3.0))
    with pytest.raises(ProfileError, match="ray misses gamma2"):
        build_bundle(f, plane(0.0), plane(2.0), 1.0, 2.0, 33)


def test_equal_states_and_degenerate():
    f = quadratic(1.0, 1.0)
    with pytest.raises(ProfileError, match="states equal"):
        build_bundle(f, plane(0.0), plane(2.0), 1.0, 1.0)
    with pytest.raises(ProfileError, match="degenerate"):
        build_bundle(quadratic(0.0, 0.0), plane(0.0), plane(2.0), 2.0, 1.0)


def test_intersecting_surfaces():
    f = quadratic(1.0, 1.0)
    with pytest.raises(ProfileError, match="intersect"):
        build_bundle(f, plane(0.0), plane(0.0), 2.0, 1.0)


def test_bundle_point_examples(bundle_a):
    for s, tau, x, u in [(0.0, 1.0, (1.0, 1.0), 1.0), (0.0, 0.0, (0.0, 0.0), 2.0), (1.0, 0.5, (1.5, -0.5), 1.5)]:
        for method in ("closed_form", "ode"):
            xp, up = bundle_point(bundle_a, [s], tau, method)
            np.testing.assert_allclose(xp, x, atol=1e-12)
            assert up == pytest.approx(u, abs=1e-12)
    with pytest.raises(ProfileError):
        bundle_point(bundle_a, [0.0], 1.5)
    with pytest.raises(ProfileError):
        bundle_point(bundle_a, [2.5], 0.5)


@pytest.mark.parametrize("name", ["bundle_a", "bundle_a_exp"])
def test_closed_form_vs_ode(name, request):
    b = request.getfixturevalue(name)
    rng = np.random.default_rng(3)
    s = rng.uniform(-2, 2, (100, 1))
    tau = rng.uniform(0, 1, 100) * b.tau0(s)
    xc, uc = bundle_points(b, s, tau)
    xo, uo = bundle_points(b, s, tau, "ode")
    assert np.max(np.abs(xc - xo)) <= 1e-8
    assert np.max(np.abs(uc - uo)) <= 1e-8


def test_inversion_examples(bundle_a):
    inv = invert_point(bundle_a, [1.0, 1.0])
    assert inv.tag == "inside"
    np.testing.assert_allclose(inv.s, [0.0], atol=1e-10)
    assert inv.tau == pytest.approx(1.0, abs=1e-10)
    assert invert_point(bundle_a, [-1.0, -1.0]).tag == "before"
    assert invert_point(bundle_a, [3.0, 3.0]).tag == "after"


@settings(max_examples=40, deadline=None)
@given(st.floats(-1.9, 1.9), st.floats(0.05, 0.95))
def test_round_trip(s, frac):
    b = _EXP
    tau = frac * float(b.tau0(np.array([[s]]))[0])
    x, _ = bundle_point(b, [s], tau)
    inv = invert_point(b, x)
    assert abs(inv.s[0] - s) <= 1e-8
    assert abs(inv.tau - tau) <= 1e-8


_EXP = scenario_a(exponential(1.0, 1.0, interval=(0.0, 3.0)))


def test_u1_values(bundle_a):
    assert eval_u1(bundle_a, [0.5, 0.5]) == pytest.approx(1.5, abs=1e-12)
    assert eval_u1(bundle_a, [0.0, 0.0]) == pytest.approx(2.0, abs=1e-12)
    assert eval_u1(bundle_a, [2.0, 0.0]) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ProfileError):
        eval_u1(bundle_a, [3.0, 3.0])


def test_residual(bundle_a):
    assert abs(transport_residual(bundle_a, [1.0, 0.5])) < 1e-7
    assert abs(transport_residual(bundle_a, [0.5, 0.5])) < 1e-7


def test_residual_second_order():
    # curved profile: exponential flux makes u1 nonlinear in x
    b = _EXP
    x, _ = bundle_point(b, [0.3], 0.5 * float(b.tau0(np.array([[0.3]]))[0]))
    r1 = transport_residual(b, x, 1e-2)
    r2 = transport_residual(b, x, 5e-3)
    if abs(r2) > 1e-11:
        assert 3.0 <= r1 / r2 <= 5.0


def test_k_constant_along_trajectory():
    b = _EXP
    s = 0.7
    tau0 = float(b.tau0(np.array([[s]]))[0])
    Ks = []
    for frac in np.linspace(0.1, 0.9, 9):
        x, _ = bundle_point(b, [s], frac * tau0)
        inv = invert_point(b, x)
        Ks.append(float(b.K(inv.s[None, :])[0]))
    assert np.ptp(Ks) <= 1e-10


def test_solve_u1_1d():
    f = quadratic(1.0)
    assert solve_u1_1d(f, 1.0, 0.0, -1.5) == pytest.approx(1.5, abs=1e-12)
    assert solve_u1_1d(f, 1.0, 0.0, 0.0) == pytest.approx(0.0, abs=1e-12)
    e = exponential(1.0)
    u = solve_u1_1d(e, 1.0, 0.0, -1.0)
    assert u == pytest.approx(0.0, abs=1e-10)
    for x in (-3.0, -0.7, -0.1):
        u = solve_u1_1d(e, 2.0, 0.5, x)
        assert abs(np.exp(u) - (-2.0 * x + 0.5)) <= 1e-10


def test_scenario_b(bundle_b):
    assert bundle_b.K_table[0] == pytest.approx(1.0, abs=1e-10)
    # u1 = -x on [-2, -1]
    for x in (-1.9, -1.5, -1.1):
        assert eval_u1(bundle_b, [x]) == pytest.approx(-x, abs=1e-10)


def test_K_slope(bundle_a, bundle_b):
    assert K_slope(bundle_a) <= 1e-6
    assert K_slope(bundle_b) == 0.0
    # tilted target x1 + 0.5 x2 = 2, so K varies along gamma1
    tilted = Hyperplane([2.0, 0.0], [[0.5, -1.0]], [1.0, 0.5], [[-5.0, 5.0]])
    b = build_bundle(quadratic(1.0, 1.0, interval=(0.0, 3.0)), plane(0.0, (-1.0, 1.0)), tilted, 2.0, 1.0, 9)
    s = b.s_samples[:, 0]
    # K = 1 / lam with lam solving (s + lam) + 0.5 (-s + lam) = 2
    K_exact = 1.5 / (2.0 - 0.5 * s)
    np.testing.assert_allclose(b.K_table, K_exact, atol=1e-10)
    assert K_slope(b) == pytest.approx(np.max(0.75 / (2.0 - 0.5 * s) ** 2), rel=1e-5)
