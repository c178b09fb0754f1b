import pytest

_CRITERIA = []


@pytest.fixture
def criterion():
    """Record one acceptance line; call as ``criterion(number, passed, detail)``."""
    def record(number, passed, detail):
        _CRITERIA.append((number, bool(passed), detail))
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(_CRITERIA):
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
