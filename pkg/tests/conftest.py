"""Collects acceptance-criterion outcomes and prints one verdict line per criterion."""
import pytest

CRITERIA = {
    1: "exact recovery on noiseless data",
    2: "precision protocol (100-run ensemble, dwell scaling)",
    3: "dispersion-slope sweep recovery",
    4: "odd-order dispersion cancellation",
    5: "first-fringe width and working-range grid",
    6: "robustness to accidental background",
    7: "oracle and consistency checks",
}

_outcomes: dict[int, list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion the test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _outcomes.setdefault(marker.args[0], []).append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, text in CRITERIA.items():
        results = _outcomes.get(n)
        if results is None:
            verdict = "NOT RUN"
        else:
            verdict = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {verdict}  {text}")
