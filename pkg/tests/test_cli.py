import json
import subprocess
import sys

import pytest

from eppa import cli

from helpers import E1_ENVELOPE, metric_corpus, metric_envelope

MALG_ENVELOPE = {"kind": "malg", "payload": {"cells": {"a": "1/2", "b": "1/4", "c": "1/4"},
                                            "atoms": [["a"], ["b"], ["c"]]}, "options": {}}
MALG_IRRATIONAL = {"kind": "malg", "payload": {"cells": {"a": "0+1/4*sqrt(2)", "b": "0+1/4*sqrt(2)",
                                                        "c": "1-1/2*sqrt(2)"},
                                              "atoms": [["a"], ["b"], ["c"]]}, "options": {}}
HILBERT_ENVELOPE = {"kind": "hilbert", "payload": {
    "dim": 3, "gram": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]],
    "subspaces": {"A": [["1", "1", "0"]], "B": [["0", "1", "1"]]},
    "map": {"domain": "A", "images": "B"}}, "options": {}}


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, json.loads(capsys.readouterr().out)


def test_extend_and_verify_running_example(tmp_path, capsys):
    inst = write(tmp_path, "e1.json", E1_ENVELOPE)
    out = str(tmp_path / "out.json")
    code, report = run(capsys, "extend", inst, "--out", out, "--verify")
    assert code == 0 and report["status"] == "ok" and "timing_seconds" in report
    doc = json.loads(open(out).read())
    assert len(doc["classes"]) == 3 and doc["generators"] == [[1, 2, 0]]
    assert "timing_seconds" not in doc
    code, report = run(capsys, "verify", inst, out)
    assert code == 0 and report["verification"]["checked"] == 12


def test_triangle_violation_exits_2_with_triple(tmp_path, capsys):
    bad = {"kind": "metric", "payload": {"points": ["x", "y", "z"],
                                         "d": [["0", "3", "1"], ["3", "0", "1"], ["1", "1", "0"]]}}
    code, report = run(capsys, "extend", write(tmp_path, "bad.json", bad))
    assert code == 2 and report["status"] == "invalid-input"
    assert sorted(report["triple"]) == ["x", "y", "z"]


def test_malformed_json_and_options_exit_2(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert run(capsys, "extend", str(path))[0] == 2
    odd = dict(E1_ENVELOPE, options={"max_degree": "six"})
    assert run(capsys, "extend", write(tmp_path, "odd.json", odd))[0] == 2


def test_small_budget_exits_3_with_last_degree(tmp_path, capsys):
    code, report = run(capsys, "extend", write(tmp_path, "e1.json", E1_ENVELOPE), "--budget-order", "2")
    assert code == 3 and report["status"] == "budget-exhausted" and report["last_degree"] == 6


def test_corrupted_distance_exits_5_naming_the_class_pair(tmp_path, capsys):
    inst = write(tmp_path, "e1.json", E1_ENVELOPE)
    out = str(tmp_path / "out.json")
    assert run(capsys, "extend", inst, "--out", out)[0] == 0
    doc = json.loads(open(out).read())
    doc["d_Y"][0][1] = "1/2"
    bad = write(tmp_path, "bad_out.json", doc)
    code, report = run(capsys, "verify", inst, bad)
    assert code == 5 and report["status"] == "mismatch"
    assert any("(0, 1)" in p for p in report["counterexample"]["problems"])


def test_result_for_another_instance_exits_2(tmp_path, capsys):
    inst = write(tmp_path, "e1.json", E1_ENVELOPE)
    out = str(tmp_path / "out.json")
    run(capsys, "extend", inst, "--out", out)
    space, maps = metric_corpus(1, 1)[0]
    other = write(tmp_path, "other.json", metric_envelope(space, maps))
    assert run(capsys, "verify", other, out)[0] == 2


def test_oracle_command(tmp_path, capsys):
    inst = write(tmp_path, "e1.json", E1_ENVELOPE)
    code, report = run(capsys, "oracle", inst)
    assert code == 0 and report["oracle"]["chains"]["disagree"] == 0
    assert report["oracle"]["chains"]["agree"] > 0
    code, report = run(capsys, "oracle", inst, "--oracle-depth", "0")
    assert code == 0 and report["oracle"]["chains"]["agree"] == 0 and report["oracle"]["warning"]
    assert run(capsys, "oracle", write(tmp_path, "m.json", MALG_ENVELOPE))[0] == 2


@pytest.mark.parametrize("envelope", [MALG_ENVELOPE, MALG_IRRATIONAL, HILBERT_ENVELOPE])
def test_other_kinds_round_trip(tmp_path, capsys, envelope):
    inst = write(tmp_path, "inst.json", envelope)
    out = str(tmp_path / "out.json")
    code, _ = run(capsys, "extend", inst, "--out", out, "--verify")
    assert code == 0
    assert run(capsys, "verify", inst, out)[0] == 0


def test_tampered_hilbert_matrix_exits_5(tmp_path, capsys):
    inst = write(tmp_path, "inst.json", HILBERT_ENVELOPE)
    out = str(tmp_path / "out.json")
    run(capsys, "extend", inst, "--out", out)
    doc = json.loads(open(out).read())
    doc["matrix"][0][0] = "2"
    assert run(capsys, "verify", inst, write(tmp_path, "bad.json", doc))[0] == 5


def test_outputs_are_byte_identical(tmp_path, capsys):
    inst = write(tmp_path, "e1.json", E1_ENVELOPE)
    texts = []
    for k in range(2):
        out = tmp_path / f"out{k}.json"
        run(capsys, "extend", inst, "--out", str(out))
        texts.append(out.read_bytes())
    assert texts[0] == texts[1]


def test_module_entry_point(tmp_path):
    inst = write(tmp_path, "e1.json", E1_ENVELOPE)
    proc = subprocess.run([sys.executable, "-m", "eppa", "extend", inst], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["generators"] == [[1, 2, 0]]
