"""Collects results of tests marked ``criterion(n, title)`` and prints one
PASS/FAIL line per acceptance criterion at the end of the run."""

from __future__ import annotations

import pytest

_CRITERIA: dict[int, dict] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            n, title = mark.args
            entry = _CRITERIA.setdefault(n, {"title": title, "ids": set(), "failed": False, "done": set()})
            entry["ids"].add(item.nodeid)


@pytest.hookimpl(tryfirst=True)
def pytest_runtest_logreport(report):
    for entry in _CRITERIA.values():
        if report.nodeid in entry["ids"]:
            if report.failed or (report.when == "call" and report.skipped):
                entry["failed"] = True
            if report.when == "call" or report.failed:
                entry["done"].add(report.nodeid)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        entry = _CRITERIA[n]
        complete = entry["done"] == entry["ids"]
        status = "PASS" if complete and not entry["failed"] else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d} {status}: {entry['title']}")
