import numpy as np
import pytest

from decflow.meshgen import flat_torus, genus2_block, icosphere
from decflow.spectral import compute_spectral_basis


@pytest.fixture(scope="session")
def torus8():
    return flat_torus(8)


@pytest.fixture(scope="session")
def torus16():
    return flat_torus(16)


@pytest.fixture(scope="session")
def torus32():
    return flat_torus(32)


@pytest.fixture(scope="session")
def torus64():
    return flat_torus(64)


@pytest.fixture(scope="session")
def torus128():
    return flat_torus(128)


@pytest.fixture(scope="session")
def sphere2():
    return icosphere(2)


@pytest.fixture(scope="session")
def sphere3():
    return icosphere(3)


@pytest.fixture(scope="session")
def sphere5():
    return icosphere(5)


@pytest.fixture(scope="session")
def genus2():
    return genus2_block()


@pytest.fixture(scope="session")
def torus32_basis(torus32):
    return compute_spectral_basis(torus32, 12)


@pytest.fixture(scope="session")
def torus64_basis(torus64):
    """56 eigenpairs: enough for the 50-mode differential probe."""
    return compute_spectral_basis(torus64, 56)


@pytest.fixture(scope="session")
def torus64_basis96(torus64):
    return compute_spectral_basis(torus64, 96)


@pytest.fixture(scope="session")
def torus128_basis400(torus128):
    """The calibrated paracalculus scale; shared by the slope criteria."""
    return compute_spectral_basis(torus128, 400)


@pytest.fixture(scope="session")
def sphere5_basis36(sphere5):
    return compute_spectral_basis(sphere5, 36)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
