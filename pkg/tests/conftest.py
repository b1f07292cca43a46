from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"
PROOFS = sorted((DATA / "proofs").glob("*.frege"))


@pytest.fixture
def data():
    return DATA


def read(name):
    return (DATA / name).read_text()


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
