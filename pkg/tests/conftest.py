import pytest

from scat2.conjectures import Workbench

# Published 8x8 corner of tau^{3,2}; rows listed from j = 7 down to j = 0.
GOLDEN_ROWS_B3C2 = [
    [0, 0, 0, 1, 33, 87, 286, 429],
    [0, 0, 0, 5, 327, 143, 132, 143],
    [0, 0, 1, 6, 33, 42, 33, 6],
    [0, 0, 2, 6, 14, 6, 2, 0],
    [0, 1, 14, 5, 14, 1, 0, 0],
    [0, 1, 2, 1, 0, 0, 0, 0],
    [1, 1, 1, 0, 0, 0, 0, 0],
    [1, 1, 0, 0, 0, 0, 0, 0],
]
GOLDEN_B3C2 = {(i, 7 - r): v for r, row in enumerate(GOLDEN_ROWS_B3C2) for i, v in enumerate(row)}

CRITERION_LINES: list[str] = []


@pytest.fixture(scope="session")
def workbench():
    return Workbench(degree=20)


def pytest_terminal_summary(terminalreporter):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERION_LINES:
            terminalreporter.write_line(line)
