import math

import numpy as np
import pytest

from kerrsqueeze import InterferometerConfig

ALPHA_REF = 10.0**2.5
PHI0_REF = 2.0 * math.pi * 1e-5


@pytest.fixture
def rng():
    return np.random.default_rng(987654321)


@pytest.fixture
def table1_cfg():
    """Config factory for the standard operating point at a given transmissivity."""

    def make(t, delta=0.0):
        return InterferometerConfig(ALPHA_REF, PHI0_REF, t, delta)

    return make


@pytest.fixture
def small_cfg():
    """A small-amplitude config the number-basis oracle can check directly."""
    return InterferometerConfig(alpha=2.0, phi0=0.3, t=0.8, delta="auto")
