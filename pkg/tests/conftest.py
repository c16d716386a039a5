import pytest

from carleson import coefficients as co
from carleson import geometry as geo
from carleson import oracles as oc
from carleson import solver as sv


@pytest.fixture(scope="session")
def grid_16():
    return geo.HalfSpaceGrid(d=1, R=1.0, h=1.0 / 16.0)


@pytest.fixture(scope="session")
def grid_64():
    return geo.HalfSpaceGrid(d=1, R=1.0, h=1.0 / 64.0)


@pytest.fixture(scope="session")
def grid_128():
    return geo.HalfSpaceGrid(d=1, R=1.0, h=1.0 / 128.0)


@pytest.fixture(scope="session")
def grid_256():
    return geo.HalfSpaceGrid(d=1, R=1.0, h=1.0 / 256.0)


@pytest.fixture(scope="session")
def grid_3d():
    return geo.HalfSpaceGrid(d=2, R=1.0, h=1.0 / 8.0)


@pytest.fixture(scope="session")
def sinh_solution(grid_128):
    return oc.SinhTestSolution(eps=0.05, k=2.0, R=1.0), \
        oc.SinhTestSolution(eps=0.05, k=2.0, R=1.0).sample(grid_128)


@pytest.fixture(scope="session")
def dkp_field_64(grid_64):
    return co.SmoothDKPField(seed=5, grid=grid_64, mu0=4.0, target_n2=0.1)


@pytest.fixture(scope="session")
def dkp_solution_64(grid_64, dkp_field_64):
    bc = sv.linear_boundary_data(grid_64)
    return sv.solve_dirichlet(dkp_field_64, grid_64, bc, check_positive=True)
