import pytest

from selfish_cc.demands import circular_demand_for
from selfish_cc.fds import Demand, FdsStructure


@pytest.fixture
def s541():
    return FdsStructure(5, 4, 1)


@pytest.fixture
def d1():
    # the (5,4,1) demand used throughout the worked example
    return Demand.parse("1234,2345,1345,1245,1235")


@pytest.fixture
def d2():
    return Demand.parse("1234,2345,1235,1245,1345")


def canonical_circular(K, alpha, f=1):
    s = FdsStructure(K, alpha, f)
    return s, circular_demand_for(s, tuple(range(1, K + 1)), (1,) * K)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
