import pytest

_RESULTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(n, ok, detail)``."""
    def record(n: int, ok: bool, detail: str) -> None:
        _RESULTS[n] = (ok, detail)
        print(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        ok, detail = _RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
