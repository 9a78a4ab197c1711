import numpy as np
import pytest

from ulamlab import cyclic, dihedral, direct_product, symmetric


@pytest.fixture(scope="session")
def group_pool():
    """Small groups covering abelian, dihedral, and symmetric structure."""
    return [
        cyclic(2),
        cyclic(3),
        cyclic(6),
        dihedral(3),
        dihedral(4),
        symmetric(3),
        direct_product(cyclic(2), cyclic(2)),
    ]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
