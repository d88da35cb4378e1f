import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ncperiods.config import DEFAULT_PANEL
from ncperiods.iterint import QuadConfig
from ncperiods.modforms import level_one_basis

settings.register_profile(
    "suite",
    max_examples=50,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def delta():
    return level_one_basis(12)[0]


@pytest.fixture(scope="session")
def g16():
    return level_one_basis(16)[0]


@pytest.fixture(scope="session")
def panel():
    return np.asarray(DEFAULT_PANEL, dtype=complex)


@pytest.fixture(scope="session")
def quick():
    # loose settings for unit tests that only need a few correct digits
    return QuadConfig(rtol=1e-9, atol=1e-11, quad_tol=1e-10)
