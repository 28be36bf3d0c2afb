import os
import sys

import pytest
from hypothesis import HealthCheck, settings

from supergeom.coeffs import GridBackend, PolyBackend
from supergeom.grassmann import GeneratorSet

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=400, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def gens():
    return GeneratorSet(2, 6)


@pytest.fixture
def grid():
    return GridBackend(32)


@pytest.fixture
def poly():
    return PolyBackend(8)
