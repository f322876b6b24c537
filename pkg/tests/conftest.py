import pytest

_LINES = pytest.StashKey()


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion.

    Lines are printed as they are recorded and repeated in the terminal
    summary, so they are visible without ``-s``.
    """
    lines = request.config.stash.setdefault(_LINES, [])

    def record(k, passed, text):
        line = f"{'PASS' if passed else 'FAIL'} criterion {k}: {text}"
        lines.append((k, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
