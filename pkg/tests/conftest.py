import numpy as np
import pytest

from locword.words import preset


@pytest.fixture(scope="session")
def dimer1():
    return preset("dimer", 1.0)


@pytest.fixture(scope="session")
def dimer_half():
    return preset("dimer", 0.5)


@pytest.fixture(scope="session")
def anderson04():
    return preset("bernoulli_anderson", 0.0, 4.0, 0.5)


@pytest.fixture(scope="session")
def free():
    return preset("free")


def naive_transfer(values, E):
    """Product of one-step matrices, last site leftmost, by plain matmul."""
    out = np.eye(2)
    for v in values:
        out = np.array([[E - v, -1.0], [1.0, 0.0]]) @ out
    return out
