from __future__ import annotations

import math

import numpy as np
import pytest

from spectral_transfer.maps import MarkovMap
from spectral_transfer.maps.catalog import lookup

LANFORD_LYAPUNOV = 0.657661780006597677
LANFORD_DIFFUSION = 0.360109486199160672
LANFORD_BRANCH_POINT = (5.0 - math.sqrt(17.0)) / 2.0


@pytest.fixture(scope="session")
def lanford() -> MarkovMap:
    return lookup("lanford")


@pytest.fixture(scope="session")
def doubling() -> MarkovMap:
    return lookup("doubling")


@pytest.fixture(scope="session")
def pwlinear() -> MarkovMap:
    return lookup("pwlinear s=3")


@pytest.fixture(scope="session")
def nonanalytic() -> MarkovMap:
    return lookup("nonanalytic-g")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)
