"""Command-line interface: schemas, outputs, determinism, exit codes."""

import json
import math

import numpy as np
import pytest

from minkdev.cli import (
    EXIT_CHECK_FAILED,
    EXIT_INPUT_ERROR,
    EXIT_OK,
    main,
)


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


EVAL_DOC = {
    "v": 1,
    "space": {"probs": [0.25, 0.75]},
    "positions": {"X": [0.0, 4.0 / 3.0], "C": [2.0, 2.0], "Y": [1.0, -1.0]},
    "measures": [{"measure": "std_dev"}, {"measure": "esd", "alpha": 0.1}],
    "sets": [
        {"kind": "sublevel", "measure": {"measure": "frd"}, "k": 1.0, "label": "frd1"},
        # the constants line (x0 = x1) in halfspace form under the weighted
        # pairing with probs (1/4, 3/4): infinite gauge off it
        {"kind": "halfspaces", "rows": [[3, -1], [-3, 1]], "rhs": [0, 0], "label": "line"},
    ],
}


def test_eval_json_with_infinity(tmp_path, capsys):
    scenario = write(tmp_path, "s.json", EVAL_DOC)
    assert main(["eval", "--scenario", scenario]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    rows = {r["position"]: r for r in payload["results"]}
    assert rows["X"]["esd(0.1)"] == pytest.approx(1.0)
    assert rows["X"]["gauge(frd1)"] == pytest.approx(4.0 / 3.0, abs=1e-9)
    assert rows["Y"]["gauge(line)"] == "inf"      # non-constant vs the constants line
    assert rows["C"]["gauge(line)"] == 0.0


def test_eval_csv_format(tmp_path):
    scenario = write(tmp_path, "s.json", EVAL_DOC)
    out = tmp_path / "table.csv"
    assert main(["eval", "--scenario", scenario, "--format", "csv", "--out", str(out)]) == EXIT_OK
    lines = out.read_text().strip().splitlines()
    assert lines[0].startswith("position,")
    assert len(lines) == 4


def test_eval_determinism(tmp_path):
    scenario = write(tmp_path, "s.json", EVAL_DOC)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["eval", "--scenario", scenario, "--out", str(a)]) == EXIT_OK
    assert main(["eval", "--scenario", scenario, "--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_boundary_csv(tmp_path):
    doc = {
        "v": 1,
        "space": {"probs": [0.25, 0.75]},
        "set": {"kind": "sublevel", "measure": {"measure": "lr"}, "k": 1.0},
    }
    scenario = write(tmp_path, "b.json", doc)
    out = tmp_path / "profile.csv"
    assert main(["boundary", "--scenario", scenario, "--rays", "8", "--out", str(out)]) == EXIT_OK
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "theta,x0,x1,finite"
    assert len(lines) == 9
    # ray 2 of 8 is straight up: the lower-range triangle vertex (0, 4/3)
    theta, x0, x1, finite = lines[3].split(",")
    assert finite == "1"
    assert float(x0) == pytest.approx(0.0, abs=1e-9)
    assert float(x1) == pytest.approx(4.0 / 3.0, abs=1e-6)
    # rerun is byte-identical
    out2 = tmp_path / "profile2.csv"
    main(["boundary", "--scenario", scenario, "--rays", "8", "--out", str(out2)])
    assert out.read_bytes() == out2.read_bytes()


def test_polar_command(tmp_path, capsys):
    doc = {
        "v": 1,
        "space": {"probs": [0.5, 0.5]},
        "polytope": {"vertices": [[2, 0], [0, 2], [-2, 0], [0, -2]]},
    }
    scenario = write(tmp_path, "p.json", doc)
    assert main(["polar", "--scenario", scenario]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["polar"]["rhs"] == [1.0, 1.0, 1.0, 1.0]
    pts = {tuple(np.round(p, 8)) for p in payload["polar"]["extreme_points"]}
    assert pts == {(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)}


def test_check_command_pass_and_fail(tmp_path, capsys):
    good = {
        "v": 1,
        "space": {"probs": [0.25, 0.25, 0.25, 0.25]},
        "check": [{
            "set": {"kind": "sublevel", "measure": {"measure": "std_dev"}, "k": 1.0},
            "properties": ["star_shaped", "convex", "stable_scalar_add"],
            "trials": 50,
        }],
    }
    assert main(["check", "--scenario", write(tmp_path, "g.json", good)]) == EXIT_OK
    capsys.readouterr()

    bad = {
        "v": 1,
        "space": {"probs": [0.25, 0.25, 0.25, 0.25]},
        "check": [{
            "set": {"kind": "ball", "p": 2, "radius": 0.5, "center": [2, 0, 0, 1]},
            "properties": ["star_shaped"],
            "trials": 100,
        }],
    }
    assert main(["check", "--scenario", write(tmp_path, "b.json", bad)]) == EXIT_CHECK_FAILED
    payload = json.loads(capsys.readouterr().out)
    assert payload["reports"][0]["passed"] is False
    assert payload["reports"][0]["counterexample"]


def test_check_measure_axioms(tmp_path, capsys):
    doc = {
        "v": 1,
        "space": {"probs": [0.1, 0.2, 0.3, 0.4]},
        "check": [{"measure": {"measure": "esd", "alpha": 0.25}, "trials": 80}],
    }
    assert main(["check", "--scenario", write(tmp_path, "m.json", doc)]) == EXIT_OK


def test_suite_subset_and_determinism(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["suite", "--only", "variance_normalisation,comonotone_additivity", "--seed", "7"]
    assert main(args + ["--out", str(a)]) == EXIT_OK
    assert main(args + ["--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    payload = json.loads(a.read_text())
    assert {r["criterion"] for r in payload["reports"]} == {
        "variance_normalisation", "comonotone_additivity"
    }


def test_input_errors(tmp_path):
    assert main(["eval"]) == EXIT_INPUT_ERROR                      # no scenario
    missing = str(tmp_path / "nope.json")
    assert main(["eval", "--scenario", missing]) == EXIT_INPUT_ERROR
    unversioned = write(tmp_path, "v0.json", {"space": {"probs": [0.5, 0.5]}})
    assert main(["eval", "--scenario", unversioned]) == EXIT_INPUT_ERROR
    nospace = write(tmp_path, "ns.json", {"v": 1})
    assert main(["eval", "--scenario", nospace]) == EXIT_INPUT_ERROR
    assert main(["suite", "--only", "not_a_check"]) == EXIT_INPUT_ERROR
    assert main(["frobnicate"]) == EXIT_INPUT_ERROR                # unknown command
