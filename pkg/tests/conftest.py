import numpy as np
import pytest

from rcnes.distribution import DistributionParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)


def random_params(rng, d, sigma_range=(0.5, 2.0), d_range=(0.3, 3.0)):
    """Well-conditioned random distribution parameters for oracle tests."""
    return DistributionParams(
        m=rng.normal(size=d),
        sigma=float(rng.uniform(*sigma_range)),
        d_diag=rng.uniform(*d_range, size=d),
        v=rng.normal(size=d) / np.sqrt(d),
    )
