import numpy as np
import pytest

from rank2sep import PartyShape

ACCEPTANCE_LINES = []


def record_criterion(number, title, passed, detail=""):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title}"
    if detail:
        line += f" ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=[(3, 2), (3, 3), (4, 2)], ids=lambda s: f"M{s[0]}N{s[1]}")
def shape(request):
    return PartyShape(*request.param)
