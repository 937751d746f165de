import numpy as np
import pytest

from frachs import SolverConfig, default_problem, midpoint_grid

# default desk-scale grid
N_DEFAULT = 4096
DOMAIN_DEFAULT = 32.0
T_MIN, DT = midpoint_grid(N_DEFAULT, DOMAIN_DEFAULT)


@pytest.fixture(scope="session")
def prob():
    """Default scenario at lam = 10x the embedding threshold."""
    return default_problem()


@pytest.fixture(scope="session")
def cfg():
    return SolverConfig()


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)
