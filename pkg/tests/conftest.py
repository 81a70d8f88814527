"""Shared machines, algebras and cached closures for the test suite."""

from functools import lru_cache

import pytest

from minsky_clone.algebra import build_algebra
from minsky_clone.subpower import sequential_relation
from minsky_clone.verify import load_fixture

FIXTURES = ("example", "trivial", "pingpong", "unbounded")


@lru_cache(maxsize=None)
def machine(name):
    return load_fixture(name)


@lru_cache(maxsize=None)
def algebra(name):
    return build_algebra(machine(name))


@lru_cache(maxsize=None)
def seq(name, m):
    return sequential_relation(algebra(name), m)


@pytest.fixture(scope="session")
def ex_alg():
    return algebra("example")


@pytest.fixture(scope="session")
def triv_alg():
    return algebra("trivial")


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
