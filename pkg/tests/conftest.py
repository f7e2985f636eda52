import pytest

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


def _entry(item):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return None
    number, title = marker.args
    return _CRITERIA.setdefault(number, {"title": title, "status": "PASS", "details": []})


@pytest.fixture
def detail(request):
    """Attach a measured value to the criterion's summary line."""
    entry = _entry(request.node)
    return entry["details"].append if entry is not None else (lambda text: None)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    entry = _entry(item)
    if entry is None:
        return
    if report.failed:
        entry["status"] = "FAIL"
    elif report.when == "call" and report.skipped and entry["status"] == "PASS":
        entry["status"] = "SKIP"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        extra = f" ({'; '.join(e['details'])})" if e["details"] else ""
        terminalreporter.write_line(f"[{e['status']}] criterion {number}: {e['title']}{extra}")
