#!/usr/bin/env python3
"""
Tests for the hermq command-line front end
"""

import csv
import json

import pytest

import config
import hermq
from exactalg import RingSpec
from qsurgery import QuadraticComplex, hyperbolic_complex


def write(path, payload) -> str:
    path.write_text(json.dumps(payload))
    return str(path)


@pytest.fixture
def hyperbolic_json(tmp_path):
    return write(tmp_path / "hyperbolic.json", {"ring": "Z", "flavor": "quadratic", "gram": [[0, 1], [1, 0]]})


@pytest.fixture(autouse=True)
def log_dir(tmp_path, monkeypatch):
    target = tmp_path / "logs"
    monkeypatch.setattr(config, "LOG_DIR", str(target))
    return target


def test_witt_over_f3(capsys):
    assert hermq.run(["witt", "--ring", "F3", "--cap", "4", "--no-log"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("WITT(")
    assert "= Z/4" in out


def test_gw_quadratic_over_z(capsys):
    assert hermq.run(["gw", "--ring", "Z", "--flavor", "quadratic", "--no-log"]) == 0
    assert "8Z (+) Z inside Z (+) Z" in capsys.readouterr().out


def test_group_report_written(tmp_path):
    out = tmp_path / "gw.json"
    assert hermq.run(["gw", "--ring", "F3", "--cap", "4", "--out", str(out), "--no-log"]) == 0
    report = json.loads(out.read_text())
    assert report["description"] == "Z (+) Z/2"
    assert report["ring"] == "F3"


def test_unsupported_ring(capsys):
    assert hermq.run(["witt", "--ring", "Z/4", "--cap", "2", "--no-log"]) == 2
    assert "Error:" in capsys.readouterr().err


def test_cap_exceeded_exit_status(capsys):
    assert hermq.run(["qcat", "--ring", "F3", "--cap", "4", "--no-log"]) == 3
    assert "exceeds" in capsys.readouterr().err


def test_check_form(hyperbolic_json, capsys):
    assert hermq.run(["check", "--in", hyperbolic_json, "--no-log"]) == 0
    assert capsys.readouterr().out.startswith("OK: form")


def test_check_complex(tmp_path, capsys):
    path = write(tmp_path / "c.json", {"ring": "Z", "lo": 0, "dims": [1, 1], "differentials": [[[2]]]})
    assert hermq.run(["check", "--in", path, "--no-log"]) == 0
    assert "OK: complex" in capsys.readouterr().out


def test_check_quadratic_complex_not_poincare(tmp_path, capsys):
    path = write(tmp_path / "x.json", {"ring": "Z", "lo": 0, "dims": [1], "n": 0, "psi": [{"0": [[1]]}]})
    assert hermq.run(["check", "--in", path, "--no-log"]) == 2
    assert "NOT POINCARE" in capsys.readouterr().out


def test_malformed_json_reports_position(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"ring": "Z",\n "gram": [[0, 1]\n')
    assert hermq.run(["check", "--in", str(path), "--no-log"]) == 2
    assert "line" in capsys.readouterr().err


def test_unknown_form_field_rejected(tmp_path, capsys):
    path = write(tmp_path / "f.json", {"ring": "Z", "gram": [[1]], "colour": "red"})
    assert hermq.run(["check", "--in", path, "--no-log"]) == 2
    assert "colour" in capsys.readouterr().err


def test_qcat_components(capsys):
    assert hermq.run(["qcat", "--ring", "F2", "--cap", "2", "--components", "--no-log"]) == 0
    out = capsys.readouterr().out
    assert "2 components" in out
    assert "component 1:" in out


def test_qcat_split_exact_with_exports(tmp_path, capsys):
    out, dot = tmp_path / "q.json", tmp_path / "q.dot"
    args = ["qcat", "--ring", "F2", "--cap", "2", "--split-exact", "--out", str(out), "--dot", str(dot), "--no-log"]
    assert hermq.run(args) == 0
    assert "1 components" in capsys.readouterr().out
    assert json.loads(out.read_text())["components"] == [["R^0", "R^1", "R^2"]]
    assert dot.read_text().startswith("digraph")


def test_classify_appends_csv(tmp_path, capsys):
    form = write(tmp_path / "f.json", {"ring": "Z", "gram": [[1, 0], [0, -1]]})
    table = tmp_path / "invariants.csv"
    for _ in range(2):
        assert hermq.run(["classify", "--in", form, "--csv", str(table), "--no-log"]) == 0
    rows = list(csv.reader(table.read_text().splitlines()))
    assert rows[0] == ["rank", "signature", "parity", "det-class", "witt-class"]
    assert rows[1:] == [["2", "0", "odd", "-1", "0"]] * 2


def test_classify_over_f3(tmp_path):
    form = write(tmp_path / "f.json", {"ring": {"Zmod": 3}, "gram": [[1, 0], [0, 1]]})
    out = tmp_path / "row.json"
    assert hermq.run(["classify", "--in", form, "--out", str(out), "--no-log"]) == 0
    row = json.loads(out.read_text())
    assert row["det_class"] == "square"
    assert row["witt_class"] != "0"


def test_classify_rejects_complex(tmp_path):
    path = write(tmp_path / "c.json", {"ring": "Z", "lo": 0, "dims": [1]})
    assert hermq.run(["classify", "--in", path, "--no-log"]) == 2


def test_normalize_with_step_log(tmp_path, capsys):
    source = write(tmp_path / "x.json", hyperbolic_complex(RingSpec.integers(), -1, 1).to_json())
    steps = tmp_path / "steps.jsonl"
    assert hermq.run(["normalize", "--in", source, "--steps-out", str(steps), "--no-log"]) == 0
    assert "Recovered form: rank 0" in capsys.readouterr().out
    records = [json.loads(line) for line in steps.read_text().splitlines()]
    assert [r["k"] for r in records] == [-1]


def test_normalize_accepts_form(hyperbolic_json, capsys):
    assert hermq.run(["normalize", "--in", hyperbolic_json, "--no-log"]) == 0
    assert "Recovered form: rank 2" in capsys.readouterr().out


def test_normalize_step_cap(tmp_path):
    source = write(tmp_path / "x.json", hyperbolic_complex(RingSpec.integers(), -1, 1).to_json())
    assert hermq.run(["normalize", "--in", source, "--cap", "0", "--no-log"]) == 3


def test_log_file_and_default_step_log(tmp_path, log_dir):
    X = hyperbolic_complex(RingSpec.integers(), -1, 1)
    source = write(tmp_path / "x.json", X.to_json())
    assert hermq.run(["normalize", "--in", source]) == 0
    logs = list(log_dir.glob("hermq_*.log"))
    assert len(logs) == 1
    assert "normalize started" in logs[0].read_text()
    assert len(list(log_dir.glob("hermq_*_steps.jsonl"))) == 1
    hermq.setup_logging(no_log=True)


def test_quadratic_complex_round_trip_through_check(tmp_path, capsys):
    X = QuadraticComplex.from_json(hyperbolic_complex(RingSpec.integers(), 0, 2).to_json())
    path = write(tmp_path / "h.json", X.to_json())
    assert hermq.run(["check", "--in", path, "--no-log"]) == 0
    assert '"poincare": true' in capsys.readouterr().out
