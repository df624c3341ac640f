import json

import numpy as np
import pytest

from lieclass.cli import EXIT_FAIL, EXIT_PASS, EXIT_USAGE, main


def run(argv, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def write_json(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_verify_table1_subset(tmp_path):
    code, rep = run(["verify", "table1", "--mu", "1", "--mu", "3", "--seed", "7", "--quiet"], tmp_path)
    assert code == EXIT_PASS and rep["pass"]
    assert len(rep["entries"]) == 8
    assert all(e["status"] == "pass" for e in rep["entries"])
    assert set(rep["timestamp"]["seconds"]) == {e["id"] for e in rep["entries"]}


def test_report_schema(tmp_path):
    code, rep = run(["verify", "table2", "--case", "2c", "--seed", "3", "--quiet"], tmp_path)
    assert code == EXIT_PASS
    assert set(rep) == {"version", "tool", "seed", "command", "entries", "pass", "timestamp"}
    (entry,) = rep["entries"]
    assert entry["id"] == "T2.case2c"
    assert set(entry) >= {"id", "citation", "status", "max_residual", "samples"}
    # the echoed command omits the output path
    assert "--out" not in rep["command"] and rep["command"][:2] == ["verify", "table2"]


def test_verify_groupoid(tmp_path):
    code, rep = run(["verify", "groupoid", "--quiet"], tmp_path)
    assert code == EXIT_PASS and len(rep["entries"]) == 2


def test_unknown_case_is_a_usage_error(tmp_path):
    assert main(["verify", "table1", "--case", "9z", "--quiet"]) == EXIT_USAGE
    assert main(["verify", "table7"]) == EXIT_USAGE
    assert main([]) == EXIT_USAGE


def test_map_cosh(tmp_path):
    code, rep = run(["map", "--C", "0", "--lam", "-1", "--eps", "1", "--class", "K",
                     "--W0", "1", "--W0p", "0", "--points", "11"], tmp_path)
    assert code == EXIT_PASS and rep["table2_row"] == "2''"
    xs = np.array([p["x"] for p in rep["B"]])
    Bs = np.array([p["B"] for p in rep["B"]])
    assert np.max(np.abs(Bs - 2 * np.tanh(xs))) < 1e-8
    assert all(s["status"] == "pass" for s in rep["symmetries"])


def test_map_free_zero_drift(tmp_path):
    code, rep = run(["map", "--C", "0", "--lam", "0", "--eps", "1", "--class", "F",
                     "--W0", "1", "--W0p", "0", "--points", "5"], tmp_path)
    assert code == EXIT_PASS
    assert all(abs(p["B"]) < 1e-12 for p in rep["B"])
    assert rep["table2_row"] == "2"


def test_map_vanishing_W_fails(tmp_path):
    # W = cos x vanishes at pi/2 and the requested piece [1.5, 1.6] straddles it
    code, rep = run(["map", "--C", "0", "--lam", "1", "--eps", "1", "--class", "K",
                     "--W", "cos(x)", "--interval", "1.5", "1.6"], tmp_path)
    assert code == EXIT_FAIL and rep["pass"] is False


def test_push_identity_and_T3(tmp_path):
    eq = write_json(tmp_path, "eq.json", {"A": "1", "B": "0", "C": "x"})
    ident = write_json(tmp_path, "id.json", {"T": "t", "X": "x", "U1": "1", "U0": "0"})
    code, out = run(["push", ident, eq], tmp_path)
    assert code == EXIT_PASS and out["C"] == "x"
    t3 = write_json(tmp_path, "t3.json", {"T": "t", "X": "x + t^2", "U1": "exp(-t*x - t^3/3)",
                                           "U0": "0"})
    code, out = run(["push", t3, eq], tmp_path, "t3out.json")
    assert code == EXIT_PASS and out["C"] == "0"


def test_push_bad_json(tmp_path):
    eq = write_json(tmp_path, "eq.json", {"A": "1", "B": "0", "C": "x"})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["push", str(bad), eq]) == EXIT_USAGE
    assert main(["push", str(tmp_path / "missing.json"), eq]) == EXIT_USAGE


def test_push_without_inverse(tmp_path):
    eq = write_json(tmp_path, "eq.json", {"A": "1", "B": "0", "C": "0"})
    hard = write_json(tmp_path, "h.json", {"T": "t^3 + t", "X": "x*exp(t) + x^3", "U1": "1"})
    assert main(["push", hard, eq]) == EXIT_FAIL
    code, out = run(["push", hard, eq, "--numeric"], tmp_path)
    assert code == EXIT_PASS and out["numeric"] and len(out["samples"]) == 25


def test_list(tmp_path, capsys):
    code, out = run(["list", "T2.*", "--json"], tmp_path)
    assert code == EXIT_PASS and len(out["cases"]) == 12
    assert main(["list", "no-such"]) == EXIT_PASS
    assert capsys.readouterr().out == ""


def test_seed_reproducible(tmp_path):
    argv = ["verify", "thm-p", "--seed", "11", "--quiet"]
    _, a = run(argv, tmp_path, "a.json")
    _, b = run(argv, tmp_path, "b.json")
    a.pop("timestamp"), b.pop("timestamp")
    assert a == b
