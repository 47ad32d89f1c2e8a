import os

import pytest
from hypothesis import HealthCheck, settings

from nilcmc.domain import build_boundary, build_grid

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def unit_circle():
    return build_boundary("circle")


@pytest.fixture(scope="session")
def ellipse21():
    return build_boundary("ellipse", a=2.0, b=1.0)


@pytest.fixture(scope="session")
def disk_grid16(unit_circle):
    return build_grid(unit_circle, 1.0 / 16)


@pytest.fixture
def acceptance_log():
    def record(line):
        ACCEPTANCE_LINES.append(line)
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
