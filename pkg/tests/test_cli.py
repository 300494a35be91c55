import csv
import json
import subprocess
import sys

import pytest

from mwlab.cli import dumps, run


def report(path):
    return json.loads(path.read_text())


def test_list(capsys):
    assert run(["list"]) == 0
    out = capsys.readouterr().out
    for name in ("veronese_s4", "veronese_s2k", "clifford", "hopf_veronese", "cone_of", "plane"):
        assert name in out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "mwlab.cli", "list"], capture_output=True, text=True)
    assert res.returncode == 0 and "hopf_veronese" in res.stdout


def test_clifford_check_equilateral(capsys):
    assert run(["clifford-check", "--r", "0.577,0.577,0.577", "--theta", "0,1.0472,2.0944", "--assert"]) == 0
    s = json.loads(capsys.readouterr().out)["summary"]
    assert s["verdict"] == "minimal, Wintgen ideal"
    assert s["minimal_defect"] < 1e-4 and s["wintgen_defect"] < 1e-4
    assert s["geometry_agrees"]


def test_clifford_check_s3_torus(capsys):
    assert run(["clifford-check", "--r", "0.70710678,0.70710678", "--theta", "0,1.5707963"]) == 0
    s = json.loads(capsys.readouterr().out)["summary"]
    assert s["verdict"] == "minimal, not Wintgen ideal"
    assert s["wintgen_defect"] == pytest.approx(1.0, abs=1e-6)


def test_gap_report(tmp_path):
    out = tmp_path / "r.json"
    assert run(["gap", "--example", "veronese_s4", "--grid", "10", "--out", str(out)]) == 0
    doc = report(out)
    assert doc["summary"]["max_gap"] < 1e-7
    assert len(doc["records"]) == 100
    assert "wall_time" in doc and doc["tool_version"]
    assert doc["config"]["sampling"] == {"mode": "grid", "n": 10}


def test_deterministic_reports_are_byte_identical(tmp_path, monkeypatch):
    argv = ["gap", "--example", "clifford", "--param", "m=3", "--random", "15", "--seed", "4", "--deterministic"]
    a, b, c = tmp_path / "a.json", tmp_path / "b.json", tmp_path / "c.json"
    run(argv + ["--out", str(a)])
    run(argv + ["--out", str(b)])
    monkeypatch.setenv("MWL_THREADS", "3")
    run(argv + ["--out", str(c)])
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()
    assert "wall_time" not in report(a)


def test_config_echo_reruns_the_computation(tmp_path):
    first = tmp_path / "first.json"
    run(["gap", "--example", "hopf_veronese", "--random", "5", "--seed", "2", "--deterministic", "--out", str(first)])
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(report(first)["config"]))
    second = tmp_path / "second.json"
    assert run(["eval", "--config", str(cfg), "gap", "--deterministic", "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_csv_output(tmp_path):
    out, table = tmp_path / "r.json", tmp_path / "r.csv"
    run(["gap", "--example", "hopf_veronese", "--grid", "2", "--out", str(out), "--csv", str(table)])
    rows = list(csv.DictReader(table.open()))
    assert len(rows) == 8
    assert {"u1", "u2", "u3", "gap", "certified"} <= set(rows[0])
    assert float(rows[0]["gap"]) == report(out)["records"][0]["gap"]


def test_totally_umbilic_member(tmp_path, capsys):
    # the DDVV gap is defined (and zero) everywhere, Moebius invariants nowhere
    out = tmp_path / "p.json"
    assert run(["gap", "--example", "plane", "--grid", "2", "--out", str(out)]) == 0
    assert report(out)["summary"]["max_gap"] == 0
    assert run(["invariants", "--example", "plane", "--grid", "2", "--out", str(out)]) == 2
    assert "geometric error" in capsys.readouterr().err
    assert all("umbilic" in r["error"] for r in report(out)["records"])


def test_invariants_at_umbilic_point_is_a_geometric_error(capsys):
    assert run(["invariants", "--example", "plane", "--point", "0,0,0"]) == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["gap", "--example", "nope", "--grid", "2"],
        ["gap", "--example", "veronese_s4"],
        ["gap", "--example", "veronese_s4", "--grid", "2", "--random", "3", "--seed", "1"],
        ["gap", "--example", "veronese_s4", "--random", "3"],
        ["gap", "--example", "veronese_s4", "--param", "oops", "--grid", "2"],
        ["gap", "--example", "clifford", "--param", "m=1", "--grid", "2"],
        ["certify", "--example", "veronese_s4", "--point", "1,2,3"],
        ["frobnicate"],
        [],
        ["eval", "--config", "/nonexistent.json", "gap"],
    ],
)
def test_usage_errors(argv, capsys):
    assert run(argv) == 1
    assert capsys.readouterr().err


def test_assert_failure_exit_code(capsys):
    assert run(["gap", "--example", "clifford", "--param", "m=2", "--grid", "3", "--assert"]) == 3
    assert run(["gap", "--example", "clifford", "--param", "m=2", "--grid", "3"]) == 0


def test_certify(capsys):
    assert run(["certify", "--example", "hopf_veronese", "--point", "0.1,0.2,0.3", "--assert"]) == 0
    s = json.loads(capsys.readouterr().out)["summary"]
    assert s["certified"] and abs(s["ddvv"]["gap"]) < 1e-7
    assert run(["certify", "--example", "clifford", "--param", "m=2", "--point", "0.1,0.2", "--assert"]) == 3


def test_invariants_and_probe(capsys):
    assert run(["invariants", "--example", "cone_of", "--random", "3", "--seed", "1", "--assert"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["summary"]["identities_hold"] and len(doc["records"]) == 3
    assert run(["probe", "--example", "cone_of", "--random", "8", "--seed", "1", "--assert"]) == 0
    assert json.loads(capsys.readouterr().out)["summary"]["consistent_with_homogeneity"]


def test_transform_check_invariance(capsys):
    argv = ["transform", "--example", "hopf_veronese", "--moebius-seed", "5", "--check-invariance", "--assert"]
    assert run(argv) == 0
    s = json.loads(capsys.readouterr().out)["summary"]
    assert s["invariant"] and s["discrepancies"]["gap"] < 1e-6
    assert run(["transform", "--example", "hopf_veronese"]) == 1


def test_eval_with_dsl_immersion(tmp_path, capsys):
    cfg = {
        "immersion": {
            "chart_dim": 2,
            "ambient": "euclidean",
            "components": ["u1", "u2", "0.3*(u1^2 - u2^2) + 0.1*u1^3"],
            "lo": [-0.5, -0.5],
            "hi": [0.5, 0.5],
        },
        "sampling": {"mode": "random", "n": 4, "seed": 0},
        "fd": {"step": 0.002, "scheme": 4},
        "tolerances": {"fd_class": 0.001},
    }
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    assert run(["eval", "--config", str(path), "invariants", "--assert"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["config"] == cfg


@pytest.mark.parametrize(
    "cfg",
    [
        {"immersion": {"gallery": "veronese_s4"}, "surprise": 1},
        {"immersion": {"gallery": "veronese_s4"}, "sampling": {"mode": "spiral", "n": 3}},
        {"immersion": {"chart_dim": 2}},
        {"immersion": {"gallery": "veronese_s4"}, "fd": {"step": -1}},
    ],
)
def test_config_schema_rejections(cfg, tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(cfg))
    assert run(["eval", "--config", str(path), "gap"]) == 1
    assert "invalid config" in capsys.readouterr().err


def test_serializer_is_stable_and_exact():
    doc = {"b": [0.1, 1e-300, 2.0], "a": {"z": True, "y": None, "x": 3}}
    text = dumps(doc)
    assert text == '{"a":{"x":3,"y":null,"z":true},"b":[0.10000000000000001,1e-300,2]}\n'
    assert json.loads(text) == doc
    assert json.loads(dumps(doc, pretty=True)) == doc
