import os
import sys
import time

sys.path.insert(0, os.path.dirname(__file__))

# criterion id -> list of (label, passed, detail); filled by test_acceptance
ACCEPTANCE_LINES = []
SUITE_BUDGET_S = 600.0
_START = time.perf_counter()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    elapsed = time.perf_counter() - _START
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for crit, label, passed, detail in sorted(ACCEPTANCE_LINES, key=lambda x: x[0]):
            terminalreporter.write_line(f"criterion {crit} [{'PASS' if passed else 'FAIL'}] {label}: {detail}")
    terminalreporter.write_line(f"suite wall time {elapsed:.1f} s (budget {SUITE_BUDGET_S:.0f} s)")


def pytest_sessionfinish(session, exitstatus):
    if time.perf_counter() - _START > SUITE_BUDGET_S and exitstatus == 0:
        session.exitstatus = 1
