import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

import bnconflict as bn
from bnconflict.cli import run

from conftest import CONF_AS

HOLMES = bn.data_path("holmes.net")
FLOOD = bn.data_path("flood.net")
WATSON = bn.data_path("watson.ev")
EMPTY = bn.data_path("empty.ev")
GOLDEN = Path(__file__).parent / "golden"
FIXTURES = Path(__file__).parent / "fixtures"


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def machine(*argv):
    code, out, _ = call(*argv, "--format", "machine")
    return code, json.loads(out)


def test_conflict_exit_code_and_value():
    code, report = machine("conflict", "--net", HOLMES, "--evidence", WATSON)
    assert code == 3
    assert report["global_conf"] == pytest.approx(CONF_AS, abs=1e-9)
    assert report["possible_conflict"] is True


def test_conflict_root_invariance():
    values = set()
    for root in ("auto", "0", "1"):
        code, out, _ = call("conflict", "--net", HOLMES, "--evidence", WATSON, "--root", root)
        assert code == 3
        values.add(next(line for line in out.splitlines() if line.startswith("global conf")))
    assert len(values) == 1


def test_conflict_empty_evidence():
    code, report = machine("conflict", "--net", HOLMES, "--evidence", EMPTY)
    assert code == 0
    assert report["global_conf"] == 0.0 and report["flags"] == ["NoFindings"]


def test_query_prints_two_decimal_table():
    code, out, _ = call("query", "--net", HOLMES, "--evidence", WATSON, "--target", "E,B")
    assert code == 0
    rows = [line.split() for line in out.splitlines()]
    assert ["N", ".47", ".05"] in rows
    assert ["Y", ".48", ".00"] in rows


def test_query_marginals_machine():
    code, report = machine("query", "--net", HOLMES)
    assert code == 0
    assert report["marginals"]["Alarm"] == pytest.approx([0.4505, 0.5495], abs=1e-12)


def test_monitor_flood():
    code, report = machine("monitor", "--net", FLOOD, "--evidence", WATSON)
    assert code == 0
    assert report["hypotheses"][0]["hypothesis"] == "Flood=Y"
    assert report["hypotheses"][0]["explains"] is True
    code, report = machine("monitor", "--net", HOLMES, "--evidence", WATSON, "--hypotheses", "Burglary")
    assert [h["hypothesis"] for h in report["hypotheses"]] == ["Burglary=N", "Burglary=Y"]
    assert not any(h["explains"] for h in report["hypotheses"])


def test_surprise():
    code, report = machine("surprise", "--net", HOLMES, "--evidence", WATSON)
    assert code == 0
    assert report["surprise_index"] == pytest.approx(0.018145, abs=1e-9)


def test_oracle_subcommand():
    code, report = machine("oracle", "--seed", "3", "--count", "50")
    assert code == 0 and report["max_abs_deviation"] < 1e-9
    code, report = machine("oracle", "--net", HOLMES, "--evidence", WATSON)
    assert code == 0 and report["cases"] == 1


def test_validate():
    code, out, _ = call("validate", "--net", HOLMES)
    assert code == 0 and "valid" in out
    code, out, err = call("validate", "--net", str(FIXTURES / "err_row_sum.net"))
    assert code == 1 and "4:9" in err


def test_input_errors_exit_1(tmp_path):
    assert call("conflict", "--net", str(tmp_path / "missing.net"))[0] == 1
    assert call("conflict", "--net", HOLMES, "--root", "9")[0] == 1
    assert call("query", "--net", HOLMES, "--target", "Flood")[0] == 1
    assert call("bogus")[0] == 1
    code, _, err = call("conflict", "--net", HOLMES, "--evidence", str(FIXTURES / "err_unknown_state.ev"))
    assert code == 1 and "2:9" in err


def test_inconsistent_evidence(tmp_path):
    ev = tmp_path / "both.ev"
    ev.write_text("Alarm = Y\nAlarm = N\n")
    code, report = machine("conflict", "--net", HOLMES, "--evidence", str(ev))
    assert code == 3
    assert report["flags"] == ["Inconsistent"] and report["global_conf"] == "+inf"
    assert call("query", "--net", HOLMES, "--evidence", str(ev))[0] == 1


def test_internal_error_exit_2(monkeypatch):
    from bnconflict import cli
    from bnconflict.errors import RunningIntersectionViolated

    def broken(network):
        raise RunningIntersectionViolated("forced")

    monkeypatch.setattr(cli, "compile_network", broken)
    assert call("compile", "--net", HOLMES)[0] == 2


@pytest.mark.parametrize("name,argv", [
    ("holmes_watson_conflict.json",
     ["conflict", "--net", HOLMES, "--evidence", WATSON, "--root", "1"]),
    ("holmes_compile.json", ["compile", "--net", HOLMES]),
])
def test_machine_output_golden(name, argv):
    code, out, _ = call(*argv, "--format", "machine")
    assert out == (GOLDEN / name).read_text()


def test_compile_dump_is_byte_identical():
    outs = {call("compile", "--net", FLOOD)[1] for _ in range(3)}
    assert len(outs) == 1


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "bnconflict", "conflict", "--net", HOLMES, "--evidence", WATSON],
        capture_output=True, text=True,
    )
    assert proc.returncode == 3
    assert "global conf: 4.703 bits" in proc.stdout
