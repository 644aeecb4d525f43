from __future__ import annotations

import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(autouse=True)
def _quiet_small_epsilon():
    # tiny orders trip the epsilon*n >= 3 advisory on every call
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="epsilon\\*n")
        yield


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
