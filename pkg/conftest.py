"""
Shared fixtures: seeded generators and small test chains
"""

import numpy as np
import pytest

from chains.generators import random_reversible
from chains.kernel import FiniteKernel
from config import reset_settings


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    for var in ("WPI_SEED", "WPI_PARALLELISM", "WPI_TOL", "WPI_GRID_POINTS", "WPI_OUTPUT_DIR",
                "OPIK_API_KEY", "OPIK_PROJECT_NAME"):
        monkeypatch.delenv(var, raising=False)
    reset_settings()
    yield
    reset_settings()


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(7))


@pytest.fixture
def two_state():
    """p = q = 0.3, mu uniform"""
    return FiniteKernel.from_matrix([[0.7, 0.3], [0.3, 0.7]])


@pytest.fixture
def independent():
    """Pi: every row equal to mu"""
    mu = np.array([0.1, 0.2, 0.3, 0.4])
    return FiniteKernel.from_matrix(np.tile(mu, (4, 1)), mu)


@pytest.fixture
def three_cycle():
    return FiniteKernel.from_matrix([[0, 1, 0], [0, 0, 1], [1, 0, 0]], np.full(3, 1 / 3))


@pytest.fixture
def random_chains(rng):
    return [random_reversible(int(rng.integers(4, 8)), rng) for _ in range(5)]
