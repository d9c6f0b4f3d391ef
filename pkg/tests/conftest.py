"""Collects one PASS/FAIL line per acceptance criterion and prints them at the end of the run."""

import pytest

ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def criterion(request):
    """Record the outcome of the calling acceptance test under its criterion number."""
    num = request.node.get_closest_marker("criterion").args[0]
    state = {"detail": ""}
    yield state
    rep = getattr(request.node, "rep_call", None)
    ok = rep is not None and rep.passed
    ACCEPTANCE[num] = f"{'PASS' if ok else 'FAIL'} criterion {num}: {state['detail']}"
    print(ACCEPTANCE[num])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
