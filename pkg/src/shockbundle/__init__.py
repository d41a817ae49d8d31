"""Shock-wave formation and decay for multidimensional scalar conservation laws.

Characteristic-bundle construction of an overturning initial profile, its
breaking and focusing, jump classification, rarefaction decay, and a
finite-volume reference solver to check all of it against.
"""

from .characteristics import (
    FrontPolyline,
    advect,
    breaking_time,
    characteristic_solution,
    focus_envelope,
    focus_point,
    jacobian,
    propagate_front,
    separation,
    shock_speed,
)
from .decay import FanSolution, build_fan, eval_fan, fan_values
from .flux import FluxModel, check_nondegenerate, eval_flux, exponential, polynomial, quadratic
from .fvm import FvmState, extract_front, init_grid, l1_distance, run_to, step
from .geometry import Hyperplane, Polyline, Ray, Sphere, ray_intersect, surface_normal, surface_point
from .initial_data import PiecewiseField, Region, classify_region, eval_initial
from .level_surfaces import eval_psi, level_surface, psi_gap
from .profile import ProfileBundle, build_bundle, bundle_point, eval_u1, invert_point, solve_u1_1d, transport_residual
from .scenario import Scenario, ScenarioError, load_scenario, parse_scenario
from .stability import Classification, StepField, check_transversality, classify_jump, directional_limit

__all__ = [
    "FluxModel", "quadratic", "exponential", "polynomial", "eval_flux", "check_nondegenerate",
    "Hyperplane", "Sphere", "Polyline", "Ray", "surface_point", "surface_normal", "ray_intersect",
    "ProfileBundle", "build_bundle", "bundle_point", "invert_point", "eval_u1", "transport_residual", "solve_u1_1d",
    "Region", "PiecewiseField", "classify_region", "eval_initial",
    "FrontPolyline", "advect", "jacobian", "breaking_time", "focus_point", "separation",
    "focus_envelope", "shock_speed", "propagate_front", "characteristic_solution",
    "level_surface", "eval_psi", "psi_gap",
    "Classification", "StepField", "directional_limit", "classify_jump", "check_transversality",
    "FanSolution", "build_fan", "eval_fan", "fan_values",
    "FvmState", "init_grid", "step", "run_to", "extract_front", "l1_distance",
    "Scenario", "ScenarioError", "parse_scenario", "load_scenario",
]
