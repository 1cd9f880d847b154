import collections

import pytest

# criterion number -> label, list of (test id, outcome)
_CRITERIA: dict[int, str] = {}
_OUTCOMES: dict[int, list] = collections.defaultdict(list)
# extra lines (discrepancy reports) printed under a criterion
NOTES: dict[int, list[str]] = collections.defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, label): acceptance criterion a test belongs to")


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker is not None:
            _CRITERIA[marker.args[0]] = marker.args[1]


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _OUTCOMES[marker.args[0]].append((item.name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        results = _OUTCOMES.get(number, [])
        if not results:
            continue
        failed = [name for name, outcome in results if outcome != "passed"]
        status = "PASS" if not failed else "FAIL"
        tr.write_line(f"[{status}] criterion {number:>2}: {_CRITERIA[number]} ({len(results) - len(failed)}/{len(results)} parts)")
        for name in failed[:4]:
            tr.write_line(f"         failed part: {name}")
        if len(failed) > 4:
            tr.write_line(f"         ... and {len(failed) - 4} more failed parts")
        for line in NOTES.get(number, []):
            tr.write_line(f"         {line}")
