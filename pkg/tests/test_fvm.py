import numpy as np
import pytest

from shockbundle.flux import quadratic
from shockbundle.fvm import FvmError, extract_front, init_grid, l1_distance, run_to, stable_dt, step
from shockbundle.initial_data import PiecewiseField

BURGERS = quadratic(1.0)
F2 = quadratic(1.0, 1.0)


def step_1d(x):
    return np.where(x[..., 0] < 0.0, 2.0, 1.0)


def test_constant_field_unchanged():
    s = init_grid(([-1.0, -1.0], [1.0, 1.0]), 16, lambda x: np.full(x.shape[:-1], 3.0), F2)
    out = run_to(s, 0.3)
    np.testing.assert_array_equal(out.u, 3.0)
    assert out.t == 0.3


def test_bad_grids():
    with pytest.raises(FvmError):
        init_grid(([-1.0], [1.0]), 4, step_1d, BURGERS)
    with pytest.raises(FvmError):
        init_grid(([1.0], [-1.0]), 16, step_1d, BURGERS)
    with pytest.raises(FvmError):
        init_grid(([-1.0], [1.0]), 16, lambda x: np.full(x.shape[:-1], np.nan), BURGERS)


def test_scenario_b_initial_data_in_range(bundle_b):
    s = init_grid(([-6.0], [4.0]), 128, PiecewiseField(bundle_b), bundle_b.flux)
    assert s.u.min() >= 1.0 and s.u.max() <= 2.0
    one = step(s)
    assert one.u.min() >= 1.0 and one.u.max() <= 2.0
    assert one.max_mass_defect <= 1e-12 * s.u.size


def test_run_to_lands_exactly():
    s = init_grid(([-2.0], [4.0]), 64, step_1d, BURGERS)
    out = run_to(s, 0.37)
    assert out.t == 0.37
    assert run_to(out, 0.37) is out
    with pytest.raises(FvmError):
        run_to(out, 0.1)
    assert stable_dt(s) == pytest.approx(0.4 * (6.0 / 64) / 2.0)


def test_step_front_position():
    # Rankine-Hugoniot speed (2 + 1) / 2
    s = run_to(init_grid(([-2.0], [4.0]), 400, step_1d, BURGERS), 1.0)
    front = extract_front(s, 2.0, 1.0)
    assert abs(front.points[0, 0] - 1.5) <= float(s.h[0])


def test_no_front_before_breaking(bundle_b):
    s = init_grid(([-6.0], [4.0]), 128, PiecewiseField(bundle_b), bundle_b.flux)
    with pytest.raises(FvmError, match="no admissible front"):
        extract_front(run_to(s, 0.5), 2.0, 1.0)


def test_l1_and_mass():
    # the jump sits on a cell edge, so cell averages equal centre values
    s = init_grid(([-2.0], [4.0]), 48, step_1d, BURGERS)
    assert l1_distance(s, step_1d) == 0.0
    out = run_to(s, 0.5)
    # outflow boundaries: mass changes by the boundary fluxes only
    expected = s.mass + 0.5 * (BURGERS(2.0, 0)[0] - BURGERS(1.0, 0)[0])
    assert out.mass == pytest.approx(expected, abs=1e-12)
