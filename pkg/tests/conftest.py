"""Shared fixtures.

The ``acceptance`` fixture collects one pass/fail line per acceptance
criterion so the terminal summary shows the whole gate at a glance even
when individual asserts would have stopped at the first failure.
"""

from __future__ import annotations

import pytest


class AcceptanceLog:
    def __init__(self) -> None:
        self.entries: list[tuple[str, bool, str]] = []

    def check(self, name: str, passed: bool, detail: str = "") -> None:
        self.entries.append((name, bool(passed), detail))
        assert passed, f"{name}: {detail}"


_LOG = AcceptanceLog()


@pytest.fixture(scope="session")
def acceptance() -> AcceptanceLog:
    return _LOG


def pytest_terminal_summary(terminalreporter, exitstatus, config) -> None:
    if not _LOG.entries:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, passed, detail in _LOG.entries:
        verdict = "PASS" if passed else "FAIL"
        line = f"ACCEPTANCE {name}: {verdict}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
