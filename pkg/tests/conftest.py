import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "twinlab", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("twinlab")

SQ2 = math.sqrt(2)


def ket(dim, *idx, coeffs=None):
    v = np.zeros(dim, dtype=complex)
    coeffs = [1.0] * len(idx) if coeffs is None else coeffs
    for i, c in zip(idx, coeffs):
        v[i] += c
    return v


def proj(dim, *idx):
    d = np.zeros(dim)
    d[list(idx)] = 1.0
    return np.diag(d).astype(complex)


@pytest.fixture
def singlet():
    """(|+-> - |-+>)/sqrt2 with |+> = e0, |-> = e1 on each spin."""
    from twinlab import StateVector

    return StateVector(ket(4, 1, 2, coeffs=[1 / SQ2, -1 / SQ2]))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
