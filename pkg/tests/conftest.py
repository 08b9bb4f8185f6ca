import cmath

import numpy as np
import pytest

from lgtt.poly import DeformationFamily, parse_polynomial

Z = ["z"]


def poly(text, vars=Z):
    return parse_polynomial(text, vars)


def a2_family(t=(0, -1), tau=1.0):
    """``z^3/3 + t1 + t2 z``."""
    return DeformationFamily(poly("z^3/3"), (poly("1"), poly("z")), tuple(t), tau)


def a3_family(t=(0, 0, 0), tau=1.0):
    """``z^4/4 + t1 + t2 z + t3 z^2``."""
    return DeformationFamily(poly("z^4/4"), (poly("1"), poly("z"), poly("z^2")), tuple(t), tau)


OFF_WALL_TAU = cmath.exp(0.3j)


@pytest.fixture
def a2():
    return a2_family((0.0, -1.0), OFF_WALL_TAU)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running numerical check")


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
