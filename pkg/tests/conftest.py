import pytest

from dagspin import make_task

_CRITERIA: list[str] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


@pytest.fixture
def criterion(request):
    """Record one acceptance line: call with (number, description)."""
    box = {}

    def declare(number, text):
        box["n"], box["text"] = number, text
        box["detail"] = ""

    def detail(text):
        box["detail"] = text

    declare.detail = detail
    yield declare
    rep = getattr(request.node, "rep_call", None)
    if "n" in box:
        status = "PASS" if rep is not None and rep.passed else "FAIL"
        extra = f" [{box['detail']}]" if box["detail"] else ""
        _CRITERIA.append(f"{status} criterion {box['n']}: {box['text']}{extra}")


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def diamond():
    return make_task(0, [1, 1, 1, 1], [(0, 1), (0, 2), (1, 3), (2, 3)], period=10)


@pytest.fixture
def chain4():
    return make_task(0, [1, 2, 3, 4], [(0, 1), (1, 2), (2, 3)], period=20)
