import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

# (number, PASS/FAIL/SKIP, text) appended by the acceptance module
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, text in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"[{status}] criterion {number:2d}: {text}")
