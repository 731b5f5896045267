import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cmtorsion.bicomplex import BiComplex
from cmtorsion.models import random_bicomplex

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_general(seed, max_n=5, profile="well"):
    """Seeded complex with random dims and random (feasible) betti numbers."""
    rng = np.random.default_rng(seed)
    n0 = int(rng.integers(1, max_n + 1))
    b0 = int(rng.integers(0, n0 + 1))
    n1 = n0 - b0 + int(rng.integers(0, 3))
    return random_bicomplex((n0, n1), (b0, n1 - n0 + b0), profile, seed)


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


@pytest.fixture
def e1():
    return BiComplex([[2]], [[0]], [[0]], [[3]])


@pytest.fixture
def diag_example():
    z = np.zeros((2, 2))
    return BiComplex(np.diag([2, 1]), z, z, np.diag([3, 1]))
