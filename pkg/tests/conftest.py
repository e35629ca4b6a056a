"""Shared pytest plumbing: repeat the acceptance verdicts at the end.

The acceptance tests print one [PASS]/[FAIL] line each, but default
output capture hides the lines of passing tests. This hook replays every
recorded verdict after the summary so a plain ``pytest -v`` run always
shows all ten.
"""

import sys


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "VERDICTS", None) if mod else None
    if lines:
        terminalreporter.section("acceptance verdicts")
        for line in lines:
            terminalreporter.write_line(line)
