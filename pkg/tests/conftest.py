import sys

import numpy as np
import pytest

from sdnlm.phantom import bundled_covariances


@pytest.fixture(scope="session")
def classes():
    """The six bundled class covariance matrices."""
    return bundled_covariances()


def random_pd(rng, n=None, scale=1.0):
    """Random Hermitian PD matrices A A^H + 0.1 I."""
    shape = (3, 3) if n is None else (n, 3, 3)
    a = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return scale * (a @ np.conj(np.swapaxes(a, -1, -2)) + 0.1 * np.eye(3))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("tests.test_acceptance")
    lines = getattr(module, "LINES", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
