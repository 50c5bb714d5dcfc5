import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "pnlw", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("pnlw")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
