import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "fracgen", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("fracgen")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def brute_force_solutions(M, upper):
    """All x in the box [0, upper] with M x = 0, by exhaustive listing."""
    M = np.asarray(M, dtype=np.int64)
    grid = np.array(list(itertools.product(*(range(u + 1) for u in upper))), dtype=np.int64)
    return grid[~np.any(grid @ M.T, axis=1)]


def as_set(X):
    return {tuple(int(v) for v in row) for row in np.asarray(X).tolist()}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
