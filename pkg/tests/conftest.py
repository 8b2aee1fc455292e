import re

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+?)(\[.*\])?$")
_results: dict[int, dict] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    if report.when != "call" and report.passed:
        return
    entry = _results.setdefault(int(m.group(1)), {"name": m.group(2), "ok": True, "seconds": 0.0})
    entry["seconds"] += report.duration
    if report.failed:
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n, r in sorted(_results.items()):
        status = "PASS" if r["ok"] else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d} {status}  {r['name']}  ({r['seconds']:.2f} s)")
