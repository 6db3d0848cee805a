import pytest
from hypothesis import HealthCheck, settings

from safebandit import default_config_path, load_config, resolve

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def sec6():
    """The shipped reference experiment, fully resolved."""
    return resolve(load_config(default_config_path()))
