import time

import pytest

_ACCEPTANCE: dict[int, tuple[str, str, float, str]] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion: call ``criterion(number, title)`` then assert."""
    state = {}

    def start(number: int, title: str, detail: str = ""):
        state.update(number=number, title=title, detail=detail, t0=time.perf_counter())
        return state

    yield start
    if state:
        failed = getattr(request.node, "rep_call", None)
        outcome = "FAIL" if failed is None or failed.failed else "PASS"
        elapsed = time.perf_counter() - state["t0"]
        _ACCEPTANCE[state["number"]] = (outcome, state["title"], elapsed, state.get("detail", ""))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        outcome, title, elapsed, detail = _ACCEPTANCE[number]
        extra = f" [{detail}]" if detail else ""
        terminalreporter.write_line(f"{outcome} criterion {number:>2}: {title} ({elapsed:.2f}s){extra}")
