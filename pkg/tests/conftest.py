import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def unit_sphere_4096():
    from skelscore.synth import fibonacci_sphere

    return fibonacci_sphere(4096)


@pytest.fixture(scope="session")
def cylinder_shape():
    from skelscore.synth import generate

    return generate("cylinder", n=4096, seed=0)
