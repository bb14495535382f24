import numpy as np
import pytest

from quasihom.material import Bilaminate, LinearProfile, MediumSpec


@pytest.fixture
def homogeneous():
    """G = rho = 1 everywhere, ten cells."""
    return MediumSpec(LinearProfile(0.0, 0.0), Bilaminate(0.5, 0.0, 0.0), epsilon_inverse=10)


@pytest.fixture
def const_bilaminate():
    """Constant macro, delta_G = delta_rho = 0.2, eps = 1/50."""
    return MediumSpec(LinearProfile(0.0, 0.0), Bilaminate(0.5, 0.2, 0.2), epsilon_inverse=50)


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
