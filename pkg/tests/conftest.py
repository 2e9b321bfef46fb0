import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nvbayes.config import load_config, rate_parameters  # noqa: E402
from nvbayes.dynamics import readout_schedule  # noqa: E402


@pytest.fixture(scope="session")
def params():
    return rate_parameters(load_config())


@pytest.fixture(scope="session")
def schedule(params):
    return readout_schedule(params, 600.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in RESULTS:
        terminalreporter.write_line(line)
