import pytest

from poisson_er.stochastic_kernel import RandomStream


@pytest.fixture
def stream():
    return RandomStream(12345, 0)
