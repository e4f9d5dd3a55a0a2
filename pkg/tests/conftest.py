import numpy as np
import pytest

from curldiv import (hollow_ball_mesh, single_tet_mesh, solid_torus_mesh,
                     structured_cube_mesh)
from curldiv.cli import compute_topology


@pytest.fixture(scope="session")
def tet1():
    return single_tet_mesh()


@pytest.fixture(scope="session")
def cube1():
    return structured_cube_mesh(1)


@pytest.fixture(scope="session")
def cube2():
    return structured_cube_mesh(2)


@pytest.fixture(scope="session")
def torus():
    return solid_torus_mesh()


@pytest.fixture(scope="session")
def hollow():
    return hollow_ball_mesh()


@pytest.fixture(scope="session")
def topo_cube1(cube1):
    return compute_topology(cube1)


@pytest.fixture(scope="session")
def topo_cube2(cube2):
    return compute_topology(cube2)


@pytest.fixture(scope="session")
def topo_torus(torus):
    return compute_topology(torus)


@pytest.fixture(scope="session")
def topo_hollow(hollow):
    return compute_topology(hollow)
