"""Common test fixtures."""
import math

import numpy as np
import pytest

from helmholtz_sweep.media import Grid3D, PmlProfile, make_velocity
from helmholtz_sweep.stencil import assemble

TWO_FACES = frozenset({"x2_low", "x3_low"})


def pytest_addoption(parser):
    """Register the option enabling desk-scale runs."""
    parser.addoption(
        "--runslow", action="store_true", default=False, help="run slow desk-scale tests"
    )


def pytest_collection_modifyitems(config, items):
    """Skip slow tests unless --runslow is given."""
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def make_operator(
    n: int = 7,
    omega: float = 2 * math.pi,
    b: int = 2,
    faces=None,
    velocity: str = "lens",
    C: float = 25.0,
):
    """Build (grid, pml, coeffs) for a small test problem."""
    grid = Grid3D(n=n, omega=omega)
    pml = PmlProfile(h=grid.h, b=b, C=C, faces=faces if faces is not None else TWO_FACES)
    vel = make_velocity(velocity, grid)
    return grid, pml, assemble(grid, vel, pml)


@pytest.fixture
def rng():
    """Seeded random generator."""
    return np.random.default_rng(1234)


def random_field(rng, shape):
    """Random complex field."""
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
