import numpy as np
import pytest

from fractal_burgers.profiles import compute_profile


@pytest.fixture(scope="session")
def profile15():
    """A short, quickly relaxed layer for alpha = 1.5 (Burgers, states +1 / -1)."""
    return compute_profile(1.5, xi_max=128.0, n_cells=2048, tol=1e-8)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
