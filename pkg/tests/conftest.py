import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("deterministic", derandomize=True, print_blob=True)
settings.load_profile("deterministic")

from polwishart.wishart import FOREST_B


def random_hpd(rng, p, scale=1.0, cond=50.0):
    """Random Hermitian positive definite matrix with bounded condition number."""
    a = rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p))
    q, _ = np.linalg.qr(a)
    eig = scale * np.exp(rng.uniform(0.0, np.log(cond), p))
    m = (q * eig) @ q.conj().T
    return (m + m.conj().T) / 2


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def forest_b():
    return np.array(FOREST_B)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
