import numpy as np
import pytest

from dispersim.crystal import CrystalFilm
from dispersim.orbit import NPP_ORBIT


@pytest.fixture
def film():
    return CrystalFilm()


@pytest.fixture
def npp_orbit():
    return NPP_ORBIT


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


def pytest_terminal_summary(terminalreporter):
    from tests import acceptance_log

    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.report():
            terminalreporter.write_line(line)
