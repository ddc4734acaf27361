import pytest

from polaron_harvest.params import Experiment, RB87, derive_condensate


@pytest.fixture(scope="session")
def peak_params():
    """K-39 in Rb-87, T = 0.065 ms, 35 krad/s, L = 5.25 c_s T."""
    return Experiment().dimensionless()


@pytest.fixture(scope="session")
def rb_condensate():
    return derive_condensate(RB87)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record ``(criterion, passed, detail)``; the line is printed in the terminal summary."""
    def record(name, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
