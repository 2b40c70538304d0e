import numpy as np
import pytest

from semisd.semistable import make_exponent, semistable_cf
from semisd.transforms import Kind, TransformFn


def cf(func, label="test"):
    return TransformFn(Kind.CF, func, label=label)


def lt(func, label="test"):
    return TransformFn(Kind.LT, func, label=label)


def pgf(func, label="test"):
    return TransformFn(Kind.PGF, func, label=label)


@pytest.fixture
def gaussian():
    return semistable_cf(make_exponent(2.0, 0.5, scale=0.5))


@pytest.fixture
def cauchy():
    return semistable_cf(make_exponent(1.0, 0.5))


@pytest.fixture
def modulated():
    return make_exponent(1.0, np.exp(-1.0), 0.03)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
