_CRITERIA = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    num = _CRITERIA.get(report.nodeid)
    if num is not None:
        _CRITERIA[report.nodeid] = (num, report.outcome)


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            _CRITERIA[item.nodeid] = mark.args[0]


def pytest_terminal_summary(terminalreporter):
    status = {}
    for v in _CRITERIA.values():
        if isinstance(v, tuple):
            num, outcome = v
            status[num] = status.get(num, True) and outcome == "passed"
    if not status:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(status):
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if status[num] else 'FAIL'}")
