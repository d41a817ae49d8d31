from pathlib import Path

import numpy as np
import pytest

from shockbundle.flux import exponential, quadratic
from shockbundle.geometry import Hyperplane
from shockbundle.profile import build_bundle

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"

# acceptance lines collected during the session, printed in the summary
ACCEPTANCE = []


def plane(offset, domain=(-2.0, 2.0)):
    """The line x1 + x2 = offset, parametrized as (offset/2, offset/2) + s (1, -1)."""
    return Hyperplane([offset / 2, offset / 2], [[1.0, -1.0]], [1.0, 1.0], [domain])


def scenario_a(flux=None, offset2=2.0, samples=33):
    flux = quadratic(1.0, 1.0, interval=(0.0, 3.0)) if flux is None else flux
    return build_bundle(flux, plane(0.0), plane(offset2, (-3.0, 3.0)), 2.0, 1.0, samples)


@pytest.fixture(scope="session")
def bundle_a():
    return scenario_a()


@pytest.fixture(scope="session")
def bundle_a_exp():
    return scenario_a(exponential(1.0, 1.0, interval=(0.0, 3.0)))


@pytest.fixture(scope="session")
def bundle_b():
    flux = quadratic(1.0, interval=(0.0, 3.0))
    g1 = Hyperplane([-2.0], np.zeros((0, 1)), [1.0])
    g2 = Hyperplane([-1.0], np.zeros((0, 1)), [1.0])
    return build_bundle(flux, g1, g2, 2.0, 1.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
