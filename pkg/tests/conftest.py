import numpy as np
import pytest

from colorcode.complexes import Colex
from colorcode.lattices import build


def pytest_addoption(parser):
    parser.addoption("--long", action="store_true", default=False, help="run the long Monte Carlo checks")


def pytest_configure(config):
    config.addinivalue_line("markers", "long: long Monte Carlo runs, enabled with --long")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--long"):
        return
    skip = pytest.mark.skip(reason="long run; pass --long to enable")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def octahedron() -> Colex:
    """Boundary of the octahedron: 6 vertices, antipodes share a color."""
    top = [[a, b, c] for a in (0, 3) for b in (1, 4) for c in (2, 5)]
    return Colex(np.array(top), np.array([0, 1, 2, 0, 1, 2]), name="octahedron")


@pytest.fixture(scope="session")
def sqoct4():
    return build("sqoct", 4)


@pytest.fixture(scope="session")
def sqoct8():
    return build("sqoct", 8)


@pytest.fixture(scope="session")
def bcc4():
    return build("bcc", 4)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
