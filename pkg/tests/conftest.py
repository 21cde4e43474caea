import os
import sys
import warnings

import pytest

sys.path.insert(0, os.path.dirname(__file__))

ACCEPTANCE_LINES = []


@pytest.fixture
def record():
    """Log one acceptance verdict; the line is echoed at the end of the session."""
    def _record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


@pytest.fixture(autouse=True)
def _strict_truncation():
    from rtnbosonic.errors import TruncationWarning
    with warnings.catch_warnings():
        warnings.simplefilter("error", TruncationWarning)
        yield
