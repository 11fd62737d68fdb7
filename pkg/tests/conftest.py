import numpy as np
import pytest
from hypothesis import settings

from dnls_nist import potentials as P
from dnls_nist.scattering import ScatterConfig, scattering_data

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture(scope="session")
def sd_gi():
    return scattering_data(P.q_gi(), ScatterConfig())


@pytest.fixture(scope="session")
def sd_gs():
    return scattering_data(P.gauss_sech(), ScatterConfig())


@pytest.fixture(scope="session")
def sd_zero():
    return scattering_data(P.zero(), ScatterConfig())


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
