import numpy as np
import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture
def record():
    """Log one pass/fail line per acceptance criterion."""

    def _record(number, title, ok, detail=""):
        status = "PASS" if ok else "FAIL"
        _ACCEPTANCE_LINES.append(f"[{status}] criterion {number:>2}: {title}" + (f"  ({detail})" if detail else ""))
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
