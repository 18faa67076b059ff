import numpy as np
import pytest

from abelian_walk.group import GroupSpec

ACCEPTANCE_LINES = []

SMALL_SPECS = [GroupSpec.cyclic(2), GroupSpec.cyclic(3), GroupSpec.cyclic(4),
               GroupSpec.cyclic(5), GroupSpec.product(2), GroupSpec.product(3)]


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
