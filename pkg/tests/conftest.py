import re

import acceptance_log

_CRITERION_RE = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")

# nodeid -> (criterion number, label, outcome)
_results: dict[int, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION_RE.search(report.nodeid)
    if m is None:
        return
    num = int(m.group(1))
    label = m.group(2).replace("_", " ")
    if report.when == "call":
        _results[num] = (label, report.outcome)
    elif report.when == "setup" and report.outcome != "passed":
        # setup failures and skips never reach the call phase
        _results[num] = (label, report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_results):
        label, outcome = _results[num]
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(
            outcome, outcome.upper()
        )
        detail = acceptance_log.details.get(num, "")
        line = f"criterion {num:02d} {label:<34s} {status}"
        if detail:
            line += f"  ({detail})"
        tr.write_line(line)
