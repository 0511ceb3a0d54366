import numpy as np
import pytest

ACCEPTANCE: list[tuple[int, bool, str]] = []


@pytest.fixture
def report():
    """Record one acceptance line: ``report(number, passed, text)``."""

    def add(number: int, passed: bool, text: str):
        ACCEPTANCE.append((number, bool(passed), text))

    return add


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, text in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {text}")
