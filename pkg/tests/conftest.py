def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance scoreboard after the run (stdout capture would
    otherwise swallow the PASS lines)."""
    try:
        from test_acceptance import ACCEPTANCE_LINES
    except ImportError:
        return
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
