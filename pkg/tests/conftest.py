import numpy as np
import pytest

import bnconflict as bn
from bnconflict.oracle import random_findings, random_network
from bnconflict.propagate import Finding

# Brute-force values for the alarm network, computed by enumerating its 24 cells.
P_ALARM = (0.4505, 0.5495)
P_SEISMO = (0.4415, 0.0680, 0.4905)
P_A_AND_S = 0.009315
CONF_AS = 4.702905244768697
POST_BE = (0.4685990338164251, 0.05314009661835749, 0.47826086956521746, 0.0)


@pytest.fixture(scope="session")
def holmes():
    return bn.holmes()


@pytest.fixture(scope="session")
def holmes_tree(holmes):
    return bn.compile_network(holmes)


@pytest.fixture
def watson(holmes_tree):
    """Session with Alarm=Y and Seismometer=state0 entered."""
    s = bn.open_session(holmes_tree)
    s.enter("Alarm", "Y", "a")
    s.enter("Seismometer", "state0", "s")
    return s


def random_cases(count, seed):
    """(network, findings) pairs; findings with zero prior are dropped."""
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(count):
        net = random_network(rng)
        prior = bn.enumerate_joint(net)
        findings = []
        for name, mask in random_findings(rng, net):
            if bn.oracle_query(prior, [(name, mask)], [])[1] > 0:
                findings.append(Finding(net[name], mask))
        cases.append((net, findings))
    return cases


@pytest.fixture(scope="session")
def random_suite():
    return random_cases(200, seed=20260101)


# -- acceptance summary -----------------------------------------------------------

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or report.outcome != "passed":
        prev = _ACCEPTANCE.get(report.nodeid)
        if prev != "FAIL":
            _ACCEPTANCE[report.nodeid] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, outcome in _ACCEPTANCE.items():
        terminalreporter.write_line(f"{outcome}  {nodeid.split('::')[-1]}")
