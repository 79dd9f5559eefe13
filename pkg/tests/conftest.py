"""Shared fixtures."""

import os

# keep test runs from writing log files
os.environ.setdefault("DISCOUNT_TS_LOG_FILE", "")

import numpy as np
import pytest

from src.core.config import reset_settings
from src.factors.simplex import SimplexFactorParams
from src.hjm.toy_model import ToyParams


@pytest.fixture(autouse=True)
def fresh_settings():
    reset_settings()
    yield
    reset_settings()


@pytest.fixture
def reference_model() -> SimplexFactorParams:
    """d=1 reference model of the pricing battery."""
    return SimplexFactorParams(kappa=[0.01], theta=[0.03], q=[0.2], gamma0=0.005)


@pytest.fixture
def deterministic_model() -> SimplexFactorParams:
    return SimplexFactorParams(kappa=[0.01], theta=[0.03], q=[0.0], gamma0=0.005)


@pytest.fixture
def two_factor_model() -> SimplexFactorParams:
    return SimplexFactorParams(kappa=[0.1, -0.2], theta=[0.05, 0.05], q=[0.3, 0.4])


@pytest.fixture
def toy() -> ToyParams:
    return ToyParams(theta=0.05)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
