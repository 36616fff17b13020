import numpy as np
import pytest

from telesim.dynamics import slave_7dof, master_6dof


@pytest.fixture(scope="session")
def slave_model():
    return slave_7dof()


@pytest.fixture(scope="session")
def master_model():
    return master_6dof()


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def random_config(model, rng, margin=0.15):
    """Uniform joint sample strictly inside the position limits."""
    lims = model.position_limits
    lo = lims[:, 0] + margin
    hi = lims[:, 1] - margin
    return rng.uniform(lo, hi)
