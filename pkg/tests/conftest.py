import sys

import pytest

from radboltz.cross_section import Form, SingularityModel
from radboltz.spectrum import build_tables


@pytest.fixture(scope="session")
def sine_model():
    return SingularityModel(s=0.5, amplitude=1.0, form=Form.POWER_LAW_SINE)


@pytest.fixture(scope="session")
def theta_model():
    return SingularityModel(s=0.5, amplitude=1.0, form=Form.POWER_LAW_THETA)


@pytest.fixture(scope="session")
def tables32(sine_model):
    return build_tables(sine_model, 32)


@pytest.fixture(scope="session")
def tables64(sine_model):
    return build_tables(sine_model, 64)


@pytest.fixture(scope="session")
def tables16(sine_model):
    return build_tables(sine_model, 16)


def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
