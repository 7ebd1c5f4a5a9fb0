import pytest

_ACCEPTANCE = {}


@pytest.fixture
def record_criterion():
    """Store ``(passed, detail)`` for an acceptance criterion and echo it."""

    def record(number, title, passed, detail=""):
        _ACCEPTANCE[number] = (title, bool(passed), detail)
        print(f"\nACCEPTANCE {number} {'PASS' if passed else 'FAIL'}: {title} | {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {title} | {detail}")
