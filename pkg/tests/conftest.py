ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def record_acceptance(label: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS.append((label, ok, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.ensure_newline()
    terminalreporter.section("acceptance criteria", sep="=")
    for label, ok, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"{status}  {label}: {detail}")
