import pytest

ACCEPTANCE = {}


@pytest.fixture
def record():
    """Store the outcome line of an acceptance criterion for the session summary."""
    def _record(name, ok, detail):
        ACCEPTANCE[name] = (bool(ok), detail)
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda s: int(s[1:])):
        ok, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{name} {'PASS' if ok else 'FAIL'}: {detail}")
