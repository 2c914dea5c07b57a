import numpy as np
import pytest

import bnconflict as bn
from bnconflict.errors import (
    AllZeroMask,
    InconsistentEvidence,
    NotCoveredByAnyClique,
    UnknownVariable,
    ZeroPriorFinding,
)
from bnconflict.propagate import Finding

from conftest import P_A_AND_S, P_ALARM, P_SEISMO, POST_BE, random_cases


def test_open_session_priors(holmes_tree):
    s = bn.open_session(holmes_tree)
    np.testing.assert_allclose(s.marginal("Alarm"), P_ALARM, atol=1e-12)
    np.testing.assert_allclose(s.marginal("Seismometer"), P_SEISMO, atol=1e-12)
    np.testing.assert_allclose(s.marginal("Burglary"), [0.5, 0.5], atol=1e-12)
    np.testing.assert_allclose(s.marginal("Earthquake"), [0.9, 0.1], atol=1e-12)


def test_enter_records_priors(holmes_tree, holmes):
    s = bn.open_session(holmes_tree)
    s.enter("Alarm", "Y")
    s.enter("Seismometer", "state0")
    assert s.priors == pytest.approx([P_ALARM[1], P_SEISMO[0]], abs=1e-12)


def test_vacuous_finding(holmes_tree, holmes):
    s = bn.open_session(holmes_tree)
    before = s.beliefs[0]
    s.enter_finding(Finding(holmes["Burglary"], (1, 1)))
    assert s.priors == [pytest.approx(1.0)]
    assert s.beliefs[0].allclose(before)


def test_bad_findings(holmes_tree, holmes):
    s = bn.open_session(holmes_tree)
    with pytest.raises(AllZeroMask):
        Finding(holmes["Alarm"], (0, 0))
    zero = bn.build_network([("A", "ny")], {}, {"A": [1.0, 0.0]})
    z = bn.open_session(bn.compile_network(zero))
    with pytest.raises(ZeroPriorFinding):
        z.enter("A", "y")
    with pytest.raises(UnknownVariable):
        s.marginal("Flood")


def test_absorb_gives_evidence_probability(watson):
    assert watson.absorb(1, [0]).total() == pytest.approx(P_A_AND_S, abs=1e-12)


def test_absorb_without_evidence_is_identity(holmes_tree):
    s = bn.open_session(holmes_tree)
    before = s.beliefs[1]
    assert s.absorb(1, [0]).allclose(before, atol=1e-15)
    assert s.absorb(0, [1]).allclose(s.beliefs[0], atol=1e-15)


def test_collect_from_alarm_clique(watson):
    watson.collect_evidence(1)
    assert watson.evidence_probability() == pytest.approx(P_A_AND_S, abs=1e-12)
    assert watson.node_records[0] == pytest.approx(P_SEISMO[0], abs=1e-12)


def test_collect_without_findings(holmes_tree):
    s = bn.open_session(holmes_tree).collect_evidence(1)
    assert all(r == pytest.approx(1.0, abs=1e-12) for r in s.node_records.values())
    assert s.evidence_probability() == pytest.approx(1.0, abs=1e-12)


def test_contradictory_findings(holmes_tree):
    s = bn.open_session(holmes_tree)
    s.enter("Alarm", "Y")
    s.enter("Alarm", "N")
    s.propagate()
    assert s.evidence_probability() == 0.0
    with pytest.raises(InconsistentEvidence):
        s.marginal("Burglary")


def test_distribute_calibrates(watson):
    watson.propagate(1)
    assert watson.clique_marginal_agreement() < 1e-9
    be0 = bn.marginalize(watson.beliefs[0], ["Burglary", "Earthquake"])
    be1 = bn.marginalize(watson.beliefs[1], ["Burglary", "Earthquake"])
    assert be0.allclose(be1, atol=1e-12)


def test_distribute_without_evidence_reproduces_priors(holmes_tree):
    s = bn.open_session(holmes_tree)
    s.propagate(1)
    np.testing.assert_allclose(s.marginal("Alarm"), P_ALARM, atol=1e-12)


def test_posteriors(watson):
    watson.propagate()
    np.testing.assert_allclose(watson.marginal("Earthquake"), [POST_BE[0] + POST_BE[2], POST_BE[1]], atol=1e-12)
    np.testing.assert_allclose(watson.marginal("Burglary"), [POST_BE[0] + POST_BE[1], POST_BE[2]], atol=1e-12)
    np.testing.assert_allclose(watson.marginal("Burglary"), [0.522, 0.478], atol=5e-4)
    joint = watson.joint_marginal(["Earthquake", "Burglary"])
    assert joint.names == ("Burglary", "Earthquake")
    np.testing.assert_allclose(joint.flat, POST_BE, atol=1e-12)
    assert np.round(joint.flat, 2).tolist() == [0.47, 0.05, 0.48, 0.0]


def test_marginal_independent_of_clique(watson):
    watson.propagate()
    for name in ("Burglary", "Earthquake"):
        np.testing.assert_allclose(watson.marginal(name, clique=0), watson.marginal(name, clique=1), atol=1e-12)


def test_joint_requests(holmes_tree):
    s = bn.open_session(holmes_tree)
    np.testing.assert_allclose(s.joint_marginal(["Burglary", "Earthquake"]).flat,
                               [0.45, 0.05, 0.45, 0.05], atol=1e-12)
    with pytest.raises(NotCoveredByAnyClique):
        s.joint_marginal(["Seismometer", "Alarm"])


def test_evidence_probability_values(holmes_tree, watson):
    assert bn.open_session(holmes_tree).evidence_probability() == 1.0
    s = bn.open_session(holmes_tree)
    s.enter("Alarm", "Y")
    assert s.evidence_probability() == pytest.approx(P_ALARM[1], abs=1e-12)
    assert watson.evidence_probability() == pytest.approx(P_A_AND_S, abs=1e-12)


# -- random suite ---------------------------------------------------------------

CASES = random_cases(60, seed=99)


@pytest.mark.parametrize("case", range(len(CASES)))
def test_matches_oracle(case):
    net, findings = CASES[case]
    joint = bn.enumerate_joint(net)
    s = bn.open_session(bn.compile_network(net))
    for f in findings:
        s.enter_finding(f)
    _, mass = bn.oracle_query(joint, findings, [])
    assert s.evidence_probability() == pytest.approx(mass, abs=1e-9)
    if mass == 0:
        return
    s.propagate()
    for name in net.names:
        table, _ = bn.oracle_query(joint, findings, [name])
        np.testing.assert_allclose(s.marginal(name), table, atol=1e-9)
    for c in s.tree.cliques:
        table, _ = bn.oracle_query(joint, findings, c.variables)
        np.testing.assert_allclose(s.joint_marginal(c.variables).values, table, atol=1e-9)
    assert s.clique_marginal_agreement() < 1e-9


@pytest.mark.parametrize("case", range(0, len(CASES), 3))
def test_order_and_root_independence(case):
    net, findings = CASES[case]
    tree = bn.compile_network(net)
    rng = np.random.default_rng(case)

    def run(order, root):
        s = bn.open_session(tree)
        for k in order:
            s.enter_finding(findings[k])
        s.collect_evidence(root)
        return s

    base = run(range(len(findings)), tree.auto_root())
    for root in range(len(tree.cliques)):
        perm = rng.permutation(len(findings))
        other = run(perm, root)
        assert other.evidence_probability() == pytest.approx(base.evidence_probability(), abs=1e-12)
        if base.evidence_probability() > 0:
            other.distribute_evidence()
            base.propagate()
            for name in net.names:
                np.testing.assert_allclose(other.marginal(name), base.marginal(name), atol=1e-12)
