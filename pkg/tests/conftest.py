import numpy as np
import pytest
import torch

torch.set_num_threads(2)

# Acceptance criteria report one line each at the end of the run; tests
# register their outcome here via the `acceptance_report` fixture.
_ACCEPTANCE_LINES: list[tuple[str, bool, str]] = []


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def record_criterion(name: str, passed: bool, detail: str = "") -> None:
    _ACCEPTANCE_LINES.append((name, passed, detail))


@pytest.fixture
def acceptance_report():
    return record_criterion


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _ACCEPTANCE_LINES:
        status = "PASS" if passed else "FAIL"
        line = f"{status}  {name}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
