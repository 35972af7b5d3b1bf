import time

import acceptance_log

_START = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    if not acceptance_log.LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in acceptance_log.LINES:
        terminalreporter.write_line(line)
    terminalreporter.write_line(f"session wall time: {time.perf_counter() - _START:.1f}s (budget 600s)")
