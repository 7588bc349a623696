import json
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"

# Filled by test_acceptance; echoed at the end of the session.
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def oracle():
    return json.loads((DATA / "oracle_values.json").read_text())


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
