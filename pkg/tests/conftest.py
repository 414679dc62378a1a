"""Collects acceptance outcomes and prints one line per criterion after the run."""

import pytest

_OUTCOMES = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    number, title = mark.args
    ok = rep.passed and _OUTCOMES.get(number, (title, True))[1]
    _OUTCOMES[number] = (title, ok)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        title, ok = _OUTCOMES[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}")
    passed = sum(ok for _, ok in _OUTCOMES.values())
    terminalreporter.write_line(f"{passed}/{len(_OUTCOMES)} criteria pass")
