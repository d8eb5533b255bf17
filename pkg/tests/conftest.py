import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# Verdict lines recorded by tests/test_acceptance.py, echoed after the run
# so they survive pytest's output capture.
VERDICTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance verdicts")
        for line in VERDICTS:
            terminalreporter.write_line(line)
