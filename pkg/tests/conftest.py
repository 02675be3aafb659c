import test_acceptance


def pytest_terminal_summary(terminalreporter):
    if not test_acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in test_acceptance.RESULTS:
        terminalreporter.write_line(line)
