import numpy as np
import pytest

from wxdiag.grid import uniform_grid


@pytest.fixture(scope="session")
def oracle_grid():
    """Default desk-scale oracle geometry (no pole rows)."""
    return uniform_grid(96, 192)


@pytest.fixture(scope="session")
def small_grid():
    return uniform_grid(32, 64)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
