import numpy as np
import pytest
from omegamap.model import MapModel, load_canned

COARSE_STEP = 0.01


@pytest.fixture(scope="session")
def fig1():
    return load_canned("fig1")


@pytest.fixture(scope="session")
def fig2():
    return load_canned("fig2")


@pytest.fixture(scope="session")
def fig3():
    return load_canned("fig3_step")


@pytest.fixture(scope="session")
def omega_model():
    return load_canned("omega_model")


@pytest.fixture(scope="session")
def scalar_bm():
    return load_canned("scalar_bm")


@pytest.fixture
def bm():
    """Standard Brownian motion as a one-state MMBM."""
    return MapModel(np.array([[0.0]]), np.array([1.0]), np.array([0.0]))


def random_model(rng: np.random.Generator, n: int = 2) -> MapModel:
    """An irreducible MMBM with moderate parameters and a nonzero mean drift."""
    off = rng.uniform(0.1, 0.6, size=(n, n))
    np.fill_diagonal(off, 0.0)
    q_gen = off - np.diag(off.sum(axis=1))
    sigma = rng.uniform(0.6, 1.4, size=n)
    mu = rng.uniform(0.05, 0.4, size=n) * rng.choice([-1.0, 1.0])
    return MapModel(q_gen, sigma, mu)


@pytest.fixture
def random_models():
    rng = np.random.default_rng(20240501)
    return [random_model(rng) for _ in range(5)]
