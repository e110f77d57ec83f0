import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ultramorse import LadderConfig, build_level, chafee_infante, deflated_search, run_ladder  # noqa: E402


@pytest.fixture(scope="session")
def trace_25():
    return run_ladder(chafee_infante(2.5), LadderConfig())


@pytest.fixture(scope="session")
def trace_50():
    return run_ladder(chafee_infante(5.0), LadderConfig())


@pytest.fixture(scope="session")
def trace_05():
    return run_ladder(chafee_infante(0.5), LadderConfig())


@pytest.fixture(scope="session")
def points_25_n8():
    level = build_level(chafee_infante(2.5), 8)
    return level, deflated_search(level)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module and module.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in module.RESULTS:
            terminalreporter.write_line(line)
