import os

import pytest

from zetamoments.critical_line import find_zeros

# acceptance runs on the moment data need zeros slightly past 1e5
ZERO_TABLE_T_MAX = 1e5 + 20


@pytest.fixture(scope="session")
def zeros_1e5():
    return find_zeros(ZERO_TABLE_T_MAX)


@pytest.fixture(scope="session")
def zeros_1e3():
    return find_zeros(1000.0)


@pytest.fixture(autouse=True)
def _single_worker(monkeypatch):
    monkeypatch.delenv("ZETAMOMENTS_THREADS", raising=False)
    yield


ACCEPTANCE_LINES = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.fixture
def record():
    return record_criterion


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
