import sys

import numpy as np
import pytest

from covrank.core import ORDINAL, ComparisonGraph


@pytest.fixture
def tournament3():
    """Item 0 beats 1 and 2, item 1 beats 2."""
    return ComparisonGraph(np.array([[0, 1, 1], [-1, 0, 1], [-1, -1, 0]]), ORDINAL)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "ACCEPTANCE_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
