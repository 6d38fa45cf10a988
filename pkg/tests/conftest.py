import numpy as np
import pytest

from JNSpace.Grids.dyadic_grid import DomainSpec, GridFunction


@pytest.fixture
def unit_line():
    """[0, 1) cut into 4 cells."""
    return DomainSpec(n=1, m=0, K=2)


@pytest.fixture
def spike(unit_line):
    return GridFunction(unit_line, [4.0, 0.0, 0.0, 0.0])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_grid(domain, rng, order=0):
    return GridFunction(domain, rng.uniform(-1.0, 1.0, size=domain.shape), order=order)
