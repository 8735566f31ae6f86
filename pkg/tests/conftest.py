import numpy as np
import pytest

from gerbecalc.complexes import StarCover, build_complex, icosahedron_mesh, torus3_mesh, torus_mesh


@pytest.fixture(scope="session")
def ico():
    return StarCover(build_complex(icosahedron_mesh()))


@pytest.fixture(scope="session")
def torus4():
    return StarCover(build_complex(torus_mesh(4, 4)))


@pytest.fixture(scope="session")
def torus8():
    return StarCover(build_complex(torus_mesh(8, 8)))


@pytest.fixture(scope="session")
def t3():
    """Smallest 3-torus grid; triple overlaps are 1-dimensional here."""
    return StarCover(build_complex(torus3_mesh(3)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
