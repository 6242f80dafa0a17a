"""Collects acceptance-criterion outcomes and prints one line per criterion."""

import pytest

_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.skipped:
        return
    if report.when == "call" or report.failed:
        number, title = marker.args
        detail = dict(item.user_properties).get("detail", "")
        _results[number] = (title, report.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        title, passed, detail = _results[number]
        line = f"{'PASS' if passed else 'FAIL'}  {number:>2}. {title}"
        terminalreporter.write_line(f"{line}  [{detail}]" if detail else line)
