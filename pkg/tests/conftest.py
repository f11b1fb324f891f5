import sys

import numpy as np
import pytest

from lltw.grid import make_grid
from lltw.solver2d import SolveParams, initial_guess, solve

SPEED = 0.8


@pytest.fixture(scope="session")
def small_solution():
    """A c = 0.8 solve on a coarse grid, shared by the 2D unit tests."""
    g = make_grid(2, 128, 64.0)
    init = initial_guess(SPEED, g, "bump", 0.3)
    return solve(SPEED, g, init, SolveParams(damping=0.6, warmup=60, max_iter=600))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("tests.test_acceptance")
    if module is not None and module.SUMMARY:
        terminalreporter.section("acceptance criteria")
        for line in module.SUMMARY:
            terminalreporter.write_line(line)
