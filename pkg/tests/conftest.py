import pytest
from hypothesis import HealthCheck, settings

from canondual import kernels

settings.register_profile(
    "ci",
    max_examples=60,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the batch-evaluation kernel once so timing-sensitive tests
    never measure JIT compilation."""
    kernels.warmup()
