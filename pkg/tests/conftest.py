import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("hamlift", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("hamlift")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_free(rng, n=1, scale=1.0):
    """Random (P, L, Q) with a well-conditioned L."""
    from hamlift.phase_space import QuadraticGeneratingFunction

    A = rng.normal(size=(n, n)) * scale
    B = rng.normal(size=(n, n)) * scale
    L = np.eye(n) + 0.3 * rng.normal(size=(n, n))
    return QuadraticGeneratingFunction(A + A.T, L, B + B.T)


# one summary line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
