import numpy as np
import pytest

from ulamnet.maps import MapSpec
from ulamnet.ulam import build_monte_carlo, build_quadrature

F1 = MapSpec("f1", z1=2.0, z2=0.2)
F2 = MapSpec("f2", z1=2.0, a=0.9)


@pytest.fixture(scope="session")
def f1_spec():
    return F1


@pytest.fixture(scope="session")
def f2_spec():
    return F2


@pytest.fixture(scope="session")
def net64():
    return build_monte_carlo(F1, 64, 10_000, seed=7)


@pytest.fixture(scope="session")
def quad8():
    return build_quadrature(F1, 8, 100_000)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
