import numpy as np
import pytest

from morselab import models


@pytest.fixture(scope="session")
def p1p1():
    return models.proj_product([1, 1])


@pytest.fixture(scope="session")
def p2():
    return models.proj_product([2])


@pytest.fixture(scope="session")
def torus1():
    return models.flat_torus(1)


@pytest.fixture(scope="session")
def torus2():
    return models.flat_torus(2)


@pytest.fixture(scope="session")
def f1():
    return models.hirzebruch_f1()


@pytest.fixture(scope="session")
def p1p1_grid(p1p1):
    return models.build_grid(p1p1, 64)


@pytest.fixture(scope="session")
def f1_grid(f1):
    return models.build_grid(f1, 64)


@pytest.fixture(scope="session")
def torus1_grid(torus1):
    return models.build_grid(torus1, 32)


@pytest.fixture(scope="session")
def torus2_grid(torus2):
    return models.build_grid(torus2, 10)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
