import pytest

from discflight.asymptotic import limit_density
from discflight.bvp import self_consistent_solve
from discflight.model import PhysicalParams


@pytest.fixture(scope="session")
def params100():
    return PhysicalParams(100.0, 1.0, 1.0)


@pytest.fixture(scope="session")
def solution100(params100):
    return self_consistent_solve(params100, tol=1e-10)


@pytest.fixture(scope="session")
def solution400():
    return self_consistent_solve(PhysicalParams(400.0, 1.0, 1.0), tol=1e-10)


@pytest.fixture(scope="session")
def limit100(params100):
    return limit_density(params100)
