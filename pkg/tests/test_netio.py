import json
import math
from pathlib import Path

import numpy as np
import pytest

import bnconflict as bn
from bnconflict import errors, netio

FIXTURES = Path(__file__).parent / "fixtures"
DATA = Path(bn.data_path("holmes.net")).parent

VALID_NETS = sorted(FIXTURES.glob("[!e]*.net")) + [DATA / "holmes.net", DATA / "flood.net"]
VALID_EVS = sorted(FIXTURES.glob("[!e]*.ev")) + [DATA / "watson.ev", DATA / "empty.ev"]

NET_ERRORS = {
    "err_missing_brace.net": (errors.NetSyntaxError, 2, 1),
    "err_bad_char.net": (errors.NetSyntaxError, 2, 26),
    "err_unknown_parent.net": (errors.UnknownVariable, 2, 9),
    "err_row_sum.net": (errors.BadRowSum, 4, 9),
    "err_row_sum_prob.net": (errors.BadRowSum, 4, 49),
    "err_duplicate_var.net": (errors.DuplicateDeclaration, 2, 1),
    "err_duplicate_cpt.net": (errors.DuplicateDeclaration, 3, 1),
    "err_row_count.net": (errors.BadCptShape, 4, 1),
    "err_row_length.net": (errors.BadCptShape, 2, 15),
    "err_missing_cpt.net": (errors.BadCptShape, 2, 1),
    "err_one_state.net": (errors.InvalidVariable, 1, 5),
    "err_bad_unit.net": (errors.NetSyntaxError, 2, 15),
}

EV_ERRORS = {
    "err_unknown_state.ev": (errors.UnknownState, 2, 9),
    "err_unknown_var.ev": (errors.UnknownVariable, 1, 1),
    "err_mask_length.ev": (errors.BadMaskLength, 1, 18),
    "err_syntax.ev": (errors.NetSyntaxError, 1, 8),
    "err_unknown_set_state.ev": (errors.UnknownState, 1, 25),
}


def test_corpus_size():
    assert len(VALID_NETS) + len(VALID_EVS) + len(NET_ERRORS) + len(EV_ERRORS) >= 20
    assert {p.name for p in FIXTURES.glob("err_*")} == set(NET_ERRORS) | set(EV_ERRORS)


@pytest.mark.parametrize("path", VALID_NETS, ids=lambda p: p.name)
def test_network_round_trip(path):
    doc = netio.parse_network(path.read_text())
    text = netio.serialize_network(doc)
    again = netio.parse_network(text)
    assert again == doc
    assert netio.serialize_network(again) == text
    doc.to_network()


@pytest.mark.parametrize("path", VALID_EVS, ids=lambda p: p.name)
def test_evidence_round_trip(path, holmes):
    doc = netio.parse_evidence(path.read_text(), holmes)
    again = netio.parse_evidence(netio.serialize_evidence(doc), holmes)
    assert again == doc
    doc.findings(holmes)


@pytest.mark.parametrize("name", sorted(NET_ERRORS))
def test_network_errors(name):
    cls, line, col = NET_ERRORS[name]
    with pytest.raises(cls) as info:
        netio.parse_network((FIXTURES / name).read_text())
    assert (info.value.line, info.value.column) == (line, col)


@pytest.mark.parametrize("name", sorted(EV_ERRORS))
def test_evidence_errors(name, holmes):
    cls, line, col = EV_ERRORS[name]
    with pytest.raises(cls) as info:
        netio.parse_evidence((FIXTURES / name).read_text(), holmes)
    assert (info.value.line, info.value.column) == (line, col)


def test_holmes_file_keeps_percent_rows(holmes):
    doc = netio.parse_network((DATA / "holmes.net").read_text())
    seis = doc.cpts[2]
    assert seis.child == "Seismometer" and seis.unit == "percent"
    assert seis.rows == ((97, 2, 1), (1, 97, 2), (1, 2, 97), (0, 3, 97))
    np.testing.assert_allclose(holmes.cpt_rows("Earthquake")[0], [0.9, 0.1])


def test_percent_inferred():
    net = netio.parse_network((FIXTURES / "inferred_percent.net").read_text()).to_network()
    np.testing.assert_allclose(net.cpt_rows("A")[0], [0.8, 0.2])
    np.testing.assert_allclose(net.cpt_rows("B"), [[0.9, 0.1], [0.3, 0.7]])


def test_row_sum_99_names_row():
    text = "var A { states: n, y }\ncpt A { unit: percent; rows: (50, 49); }\n"
    with pytest.raises(errors.BadRowSum, match="row 0"):
        netio.parse_network(text)


def test_watson_evidence(holmes):
    doc = netio.parse_evidence("Alarm = Y; Seismometer = state0", holmes)
    findings = doc.findings(holmes)
    assert [f.mask for f in findings] == [(0, 1), (1, 0, 0)]
    assert [f.label for f in findings] == ["Alarm=Y", "Seismometer=state0"]


def test_set_notation(holmes):
    doc = netio.parse_evidence("Seismometer in {state0, state1}", holmes)
    assert doc.findings(holmes)[0].mask == (1, 1, 0)


def test_unknown_state(holmes):
    with pytest.raises(errors.UnknownState):
        netio.parse_evidence("Alarm = Maybe", holmes)


def test_in_memory_network_round_trip():
    rng = np.random.default_rng(3)
    for _ in range(10):
        net = bn.oracle.random_network(rng)
        text = netio.serialize_network(netio.network_to_document(net))
        back = netio.parse_network(text).to_network()
        for name in net.names:
            assert back.parents[name] == net.parents[name]
            np.testing.assert_array_equal(back.cpts[name].values, net.cpts[name].values)


def test_dump_report_is_valid_json_with_sentinels():
    text = netio.dump_report({"b": 1.5, "a": math.inf, "c": [np.float64(0.25)]})
    assert list(json.loads(text)) == ["b", "a", "c"]
    assert json.loads(text)["a"] == "+inf"
