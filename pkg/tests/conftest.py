"""Echo the acceptance-criterion verdict lines in the terminal summary so
they are visible even with output capture on."""

import helpers


def pytest_terminal_summary(terminalreporter):
    if helpers.acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in helpers.acceptance_lines:
            terminalreporter.write_line(line)
