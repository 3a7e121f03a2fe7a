import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

CRITERIA_RESULTS: list[tuple[str, bool]] = []


def record_criterion(name: str, passed: bool) -> None:
    CRITERIA_RESULTS.append((name, passed))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERIA_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed in CRITERIA_RESULTS:
        mark = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{mark}  {name}")
