import numpy as np
import pytest

from todapolymer.core_paths import RngStream, TimeGrid, sample_brownian_path


@pytest.fixture
def bm3():
    grid = TimeGrid.from_dt(1e-3, 1.0)
    return sample_brownian_path(3, None, grid, RngStream(11))


def brownian(n, dt=1e-2, horizon=1.0, seed=0, drift=None):
    return sample_brownian_path(n, drift, TimeGrid.from_dt(dt, horizon), RngStream(seed))


@pytest.fixture
def np_rng():
    return np.random.default_rng(2024)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
