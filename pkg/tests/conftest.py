from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest



@pytest.fixture
def report(request):
    """Record one pass/fail line for an acceptance criterion."""
    lines = request.config.stash.setdefault(_KEY, [])

    def emit(label: str, passed: bool, detail: str) -> bool:
        line = f"{'PASS' if passed else 'FAIL'}  {label}: {detail}"
        print(line)
        lines.append(line)
        return passed

    return emit


_KEY = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
