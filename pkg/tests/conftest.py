import pytest

ACCEPTANCE_CRITERIA = 12
_RESULTS = pytest.StashKey[dict]()


@pytest.fixture(scope="session")
def acceptance(request):
    """Record the outcome of one acceptance criterion, then assert it."""
    store = request.config.stash.setdefault(_RESULTS, {})

    def record(number: int, title: str, passed: bool, detail: str) -> None:
        store[number] = (title, bool(passed), detail)
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title} -- {detail}"
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_RESULTS, None)
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, ACCEPTANCE_CRITERIA + 1):
        if n in store:
            title, ok, detail = store[n]
            terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n:>2}: {title} -- {detail}")
        else:
            terminalreporter.write_line(f"[FAIL] criterion {n:>2}: not recorded (errored before a verdict)")
