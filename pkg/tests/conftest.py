"""Shared pytest wiring.

The acceptance tests append one summary line per criterion to
ACCEPTANCE_LINES; they are echoed in a terminal section at the end of
the run so the verdicts survive output capture.
"""

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
