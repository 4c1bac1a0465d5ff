import pytest

_CRITERIA = []


@pytest.fixture
def report():
    """Record one summary line per acceptance criterion."""
    def _report(name, passed, detail):
        _CRITERIA.append((name, passed, detail))
        return passed
    return _report


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _CRITERIA:
        terminalreporter.write_line(f"{name}: {'PASS' if passed else 'FAIL'}  {detail}")
