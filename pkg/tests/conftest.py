import pytest

from hartree.constants import SystemParams
from hartree.radial import make_grid


@pytest.fixture(scope="session")
def grid6():
    return make_grid(6)


@pytest.fixture(scope="session")
def grid6_coarse():
    return make_grid(6, M=512)


@pytest.fixture(scope="session")
def sym_params():
    return SystemParams(6, 1.0, 1.0, 2.0)


@pytest.fixture(scope="session")
def asym_params():
    return SystemParams(6, 1.0, 1.5, 2.0)
