"""Shared pytest hooks: print one line per acceptance criterion."""

from __future__ import annotations

_acceptance: dict[str, object] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance[report.nodeid.split("::")[-1]] = report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance):
        report = _acceptance[name]
        if report.outcome == "passed":
            label = "PASS"
        elif report.outcome == "skipped":
            label = "SKIP"
        else:
            label = "FAIL"
        terminalreporter.write_line("%-4s %s" % (label, name))
