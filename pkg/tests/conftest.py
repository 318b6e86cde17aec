import itertools

import pytest

from permmap.compose import compose_p91, compose_p130, compose_u, compose_v
from permmap.tables import builtin_table


def words(n):
    return list(itertools.product(range(3), repeat=n))


def hd(a, b):
    return sum(x != y for x, y in zip(a, b))


@pytest.fixture(scope="session")
def F():
    return builtin_table("F")


@pytest.fixture(scope="session")
def tables():
    return {name: builtin_table(name) for name in ("F", "G", "H4", "R", "S", "T")}


@pytest.fixture(scope="session")
def p91():
    return compose_p91()


@pytest.fixture(scope="session")
def U():
    return compose_u()


@pytest.fixture(scope="session")
def V():
    return compose_v()


@pytest.fixture(scope="session")
def p130(U, V):
    return compose_p130(U, V)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
