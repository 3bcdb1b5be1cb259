import pytest

_RESULTS = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(n, ok, detail)``."""
    store = request.config.stash.setdefault(_RESULTS, {})

    def record(n, ok, detail):
        store[n] = (bool(ok), detail)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_RESULTS, {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(store):
        ok, detail = store[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
