"""Suite-wide pytest wiring.

The verification battery in test_acceptance.py registers one verdict
line per guarantee; the terminal-summary hook prints them after the run
so the checklist survives output capturing.
"""

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance verdicts")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
