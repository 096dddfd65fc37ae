import pytest

from nikkit.branchkit import SystemParams


@pytest.fixture(scope="session")
def params():
    return SystemParams(1.5, 3.0)


@pytest.fixture(scope="session")
def stress_params():
    return SystemParams(1.1, 50.0)


# one line per acceptance criterion, collected by tests/test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
