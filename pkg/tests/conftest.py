import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_CRITERIA = {}
_NOTES = {}
_MARKED = {}  # nodeid -> (number, title)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.fixture
def note(request):
    """Attach measured values to the current acceptance criterion's summary line."""
    marker = request.node.get_closest_marker("criterion")

    def _note(text):
        if marker is not None:
            _NOTES.setdefault(marker.args[0], []).append(text)

    return _note


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    marker = _MARKED.get(report.nodeid)
    if marker is None:
        return
    num, title = marker
    prev = _CRITERIA.get(num, (title, True))
    _CRITERIA[num] = (title, prev[1] and report.passed)


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _MARKED[item.nodeid] = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, ok = _CRITERIA[num]
        detail = "; ".join(_NOTES.get(num, []))
        line = f"{'PASS' if ok else 'FAIL'} [{num}] {title}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
