import re
from collections import defaultdict

import pytest

from cubictess.tessellation import build_full

_CRITERION = re.compile(r"test_criterion_(\d+)_")
_outcomes: dict[int, list[str]] = defaultdict(list)


@pytest.fixture(scope="session")
def tessellation():
    """Memoized full tessellation builder, shared between modules."""
    cache = {}

    def get(q, p):
        if (q, p) not in cache:
            cache[q, p] = build_full(q, p)
        return cache[q, p]

    return get


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or report.outcome != "passed":
        outcome = "xfail" if hasattr(report, "wasxfail") else report.outcome
        _outcomes[int(m.group(1))].append(outcome)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        results = _outcomes[n]
        if all(r == "passed" for r in results):
            verdict = "PASS"
        elif "failed" not in results and "xfail" in results:
            verdict = "XFAIL"
        else:
            verdict = "FAIL"
        noun = "check" if len(results) == 1 else "checks"
        terminalreporter.write_line(f"criterion {n:2d}: {verdict} ({len(results)} {noun})")
