import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_with_norm(rng, n, norm, complex_=False):
    a = rng.uniform(-1, 1, (n, n))
    if complex_:
        a = a + 1j * rng.uniform(-1, 1, (n, n))
    return a * (norm / np.abs(a).sum(axis=0).max())


@pytest.fixture
def report(capsys):
    """Print an acceptance outcome line past pytest's capture."""
    def emit(outcome):
        with capsys.disabled():
            print("\n" + outcome.line())
        return outcome
    return emit
