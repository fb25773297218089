"""Prints one PASS/FAIL line per acceptance criterion after the run."""

ACCEPTANCE_RESULTS = {}


def record_acceptance(number: int, title: str, passed: bool, detail: str = ""):
    ACCEPTANCE_RESULTS[number] = (title, passed, detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        title, passed, detail = ACCEPTANCE_RESULTS[number]
        verdict = "PASS" if passed else "FAIL"
        suffix = f" ({detail})" if detail else ""
        terminalreporter.write_line(
            f"criterion {number} [{title}]: {verdict}{suffix}")
