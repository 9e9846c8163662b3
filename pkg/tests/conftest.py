import numpy as np
import pytest

from gbfiber.fiber_modes import (
    REFERENCE_FIBER,
    Family,
    omega_from_v,
    omega_from_wavelength,
    solve,
    solve_at_beta,
)


@pytest.fixture(scope="session")
def spec():
    return REFERENCE_FIBER


@pytest.fixture(scope="session")
def omega_1550():
    return omega_from_wavelength(1.55)


@pytest.fixture(scope="session")
def fundamental(spec, omega_1550):
    return solve(spec, omega_1550, 1, Family.PHYSICAL)[0]


@pytest.fixture(scope="session")
def gauge_pair_1550(spec, omega_1550):
    gauge = solve(spec, omega_1550, 0, Family.GAUGE)[0]
    ghost = solve(spec, omega_1550, 0, Family.GHOST)[0]
    return gauge, ghost


@pytest.fixture(scope="session")
def shared_beta_modes(spec):
    """Every m = 1 mode at the beta of the V = 6 fundamental."""
    beta = solve(spec, omega_from_v(spec, 6.0), 1, Family.PHYSICAL)[0].beta
    modes = []
    for family in Family:
        modes.extend(solve_at_beta(spec, beta, 1, family))
    return modes


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
