import math
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from fucik_lab.weights import PiecewiseConstantWeight, constant, scale  # noqa: E402

TWO_PHASE = ((0.0, 0.5, 1.0), (1.0, 3.0))
UNIT = ((0.0, 1.0), (1.0,))
FLAT_TWO = ((0.0, 0.5, 1.0), (2.0, 2.0))


@pytest.fixture
def two_phase():
    return PiecewiseConstantWeight(*TWO_PHASE)


@pytest.fixture
def unit_pi():
    """m = n = 1 on (0, pi)."""
    return scale(constant(1.0), 1.0, math.pi), scale(constant(1.0), 1.0, math.pi)


def scaled_pair(m, n, eps, ell=1.0):
    return scale(m, eps, ell), scale(n, eps, ell)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
