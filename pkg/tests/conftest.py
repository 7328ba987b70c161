import os
import sys

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

sys.path.insert(0, os.path.dirname(__file__))


@pytest.fixture
def out_dir(tmp_path):
    return tmp_path / "out"


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_report():
    """Record one summary line per acceptance criterion."""
    def record(label, ok, detail, elapsed=None, limit=None):
        timing = "" if elapsed is None else f" [{elapsed:.2f}s / {limit:g}s]"
        status = "INFO" if ok is None else ("PASS" if ok else "FAIL")
        line = f"{status} criterion {label}: {detail}{timing}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return line
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
