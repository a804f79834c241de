"""Shared fixtures and the acceptance summary printed at the end of a run."""

import numpy as np
import pytest

from lincalderon.acceptance import _exp_lambda_dot, _wide_grid
from lincalderon.grid import make_grid

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def wide_grid():
    """Grid resolving probe frequencies up to 256 (shared with the acceptance run)."""
    return _wide_grid()


@pytest.fixture(scope="session")
def exp_lambda_dot():
    """Linearized DN map for q = exp(-y_n) on the wide grid."""
    return _exp_lambda_dot()


@pytest.fixture(scope="session")
def small_grid():
    return make_grid(32, 4.0, 48)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
