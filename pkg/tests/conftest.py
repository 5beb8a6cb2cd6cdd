import numpy as np
import pytest

from asympde.flux import FluxModel


@pytest.fixture
def cubic():
    return FluxModel.cubic()


@pytest.fixture
def burgers():
    return FluxModel.burgers()


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance verdict; printed in the terminal summary."""

    def record(number, ok, detail):
        ACCEPTANCE[number] = (bool(ok), detail)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
