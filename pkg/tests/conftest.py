"""Shared fixtures and the acceptance-criteria summary hook.

Tests marked ``@pytest.mark.acceptance(num, label)`` are grouped by
criterion number; after the run one PASS/FAIL line is printed per
criterion so the release gate can be read at a glance.
"""

import pytest

_RESULTS: dict[int, dict] = {}


def pytest_runtest_makereport(item, call):
    if call.when != "call":
        return
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    num = marker.args[0]
    label = marker.args[1] if len(marker.args) > 1 else ""
    entry = _RESULTS.setdefault(num, {"label": label, "passed": 0, "failed": 0})
    if label and not entry["label"]:
        entry["label"] = label
    if call.excinfo is None:
        entry["passed"] += 1
    else:
        entry["failed"] += 1


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_RESULTS):
        entry = _RESULTS[num]
        ok = entry["failed"] == 0
        verdict = "PASS" if ok else "FAIL"
        counts = f"{entry['passed']}/{entry['passed'] + entry['failed']} checks"
        tr.write_line(
            f"criterion {num}: {verdict}  {entry['label']} ({counts})",
            green=ok,
            red=not ok,
        )
