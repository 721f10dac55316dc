import numpy as np
import pytest

from transversal import RatMap, flexible_lattes


@pytest.fixture
def cheb2():
    return RatMap.polynomial([-2, 0, 1])


@pytest.fixture
def misiurewicz():
    return RatMap.polynomial([1j, 0, 1])


@pytest.fixture
def cheb3():
    return RatMap.polynomial([0, -3, 0, 1])


@pytest.fixture
def joukowski():
    # z + 1/z
    return RatMap.from_coeffs([1, 0, 1], [0, 1])


@pytest.fixture(scope="session")
def lattes2():
    return flexible_lattes(2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
