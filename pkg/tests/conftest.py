import math

import pytest

from phasecode.modes import DEFAULT_GRID, make_flipped, make_tem00


@pytest.fixture(scope="session")
def grid():
    return DEFAULT_GRID


@pytest.fixture(scope="session")
def u0(grid):
    return make_tem00(grid, 1.0)


@pytest.fixture(scope="session")
def uf0(u0):
    return make_flipped(u0)


HALF_PI = 0.5 * math.pi


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[number][1])
