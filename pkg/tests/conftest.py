import time

import pytest

RESULTS: dict[int, tuple[str, str]] = {}


@pytest.fixture
def criterion(request):
    """Record the outcome of one acceptance criterion for the summary block."""
    marker = request.node.get_closest_marker("criterion")
    number, title = marker.args
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    rep = getattr(request.node, "rep_call", None)
    status = "PASS" if rep is not None and rep.passed else "FAIL"
    RESULTS[number] = (status, f"{title} ({elapsed:.2f}s)")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        status, text = RESULTS[number]
        terminalreporter.write_line(f"{status} criterion {number}: {text}")
