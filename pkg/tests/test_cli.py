"""Command-line interface tests: exit codes, report shapes, determinism."""

import json
from pathlib import Path

import pytest

from memdiff.cli import fmt_sig, main

REPO = Path(__file__).resolve().parent.parent
CONFIGS = REPO / "configs"


def run(args):
    return main([str(a) for a in args])


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def test_fmt_sig_fixed_digits():
    assert fmt_sig(1.0) == "1"
    assert fmt_sig(0.30000000000000004, 12) == "0.3"
    assert fmt_sig(123456.789, 4) == "1.235e+05"


def test_validate_command(tmp_path):
    out = tmp_path / "report.json"
    code = run(["validate", "--config", CONFIGS / "symmetric_heat.json",
                "--out", out])
    assert code == 0
    payload = read_json(out)
    assert payload["passed"]
    names = [c["condition"] for c in payload["checks"]]
    assert names == ["I", "II", "III", "IV", "V"]


def test_solve_command_conserves_unit_datum(tmp_path):
    cfg = read_json(CONFIGS / "symmetric_heat.json")
    cfg["phi"] = {"kind": "constant-one", "params": [1.0]}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "field.csv"
    assert run(["solve", "--config", cfg_path, "--out", out]) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "s,x,u,side"
    assert len(lines) == 22
    for line in lines[1:]:
        s, x, u, side = line.split(",")
        assert abs(float(u) - 1.0) < 1e-3
        assert side in ("left", "membrane", "right")


def test_solve_command_heat_oracle(tmp_path):
    import math
    out = tmp_path / "field.csv"
    assert run(["solve", "--config", CONFIGS / "symmetric_heat.json",
                "--out", out]) == 0
    for line in out.read_text().strip().split("\n")[1:]:
        s, x, u, side = line.split(",")
        var = 0.36 + 1.0
        want = 0.6 / math.sqrt(var) * math.exp(-(float(x) - 0.3) ** 2 / (2 * var))
        assert abs(float(u) - want) < 1e-3


def test_solve_rerun_byte_identical(tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    run(["solve", "--config", CONFIGS / "skew.json", "--out", out1])
    run(["solve", "--config", CONFIGS / "skew.json", "--out", out2])
    assert out1.read_bytes() == out2.read_bytes()


def test_malformed_config_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    assert run(["solve", "--config", bad]) == 2
    assert "config error" in capsys.readouterr().err


def test_missing_key_named_in_diagnostic(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"problem": {"left": {}, "right": {},
                                           "wentzell": {}, "horizon": 1.0}}))
    assert run(["solve", "--config", cfg]) == 2
    err = capsys.readouterr().err
    assert "membrane" in err


def test_check_suites(tmp_path):
    for suite in ("semigroup", "conjugation", "parametrix"):
        out = tmp_path / f"{suite}.json"
        code = run(["check", "--config", CONFIGS / "skew.json",
                    "--suite", suite, "--out", out])
        assert code == 0, suite
        payload = read_json(out)
        assert payload["passed"]
        assert payload["schema"] == "report.v1"
        for item in payload["checks"]:
            assert set(item) == {"check", "case", "statistic", "tolerance", "pass"}


def test_check_generator_suite(tmp_path):
    out = tmp_path / "gen.json"
    code = run(["check", "--config", CONFIGS / "skew.json",
                "--suite", "generator", "--out", out])
    assert code == 0
    assert read_json(out)["passed"]


def test_reports_validate_against_shipped_schema(tmp_path):
    jsonschema = pytest.importorskip("jsonschema")
    out = tmp_path / "report.json"
    run(["check", "--config", CONFIGS / "symmetric_heat.json",
         "--suite", "semigroup", "--out", out])
    schema = read_json(REPO / "schema" / "report.v1.json")
    jsonschema.validate(read_json(out), schema)
    problem_schema = read_json(REPO / "schema" / "problem.v1.json")
    cfg = read_json(CONFIGS / "skew.json")
    jsonschema.validate(cfg["problem"], problem_schema)


def test_compare_mc_command(tmp_path):
    cfg = read_json(CONFIGS / "symmetric_heat.json")
    cfg["grid"] = {"min": -0.5, "max": 0.5, "n": 3}
    cfg["t"] = 0.5
    cfg["mc"] = {"paths": 8000, "dt": 0.002, "seed": 42}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out1, out2 = tmp_path / "mc1.json", tmp_path / "mc2.json"
    assert run(["compare-mc", "--config", cfg_path, "--out", out1]) == 0
    payload = read_json(out1)
    assert payload["passed"]
    assert payload["seed"] == 42
    # identical seed: byte-identical report
    assert run(["compare-mc", "--config", cfg_path, "--out", out2]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_compare_mc_command_skew(tmp_path):
    cfg = read_json(CONFIGS / "skew.json")
    cfg["grid"] = {"min": -0.5, "max": 0.5, "n": 3}
    cfg["t"] = 0.5
    cfg["mc"] = {"paths": 8000, "dt": 0.001, "seed": 42}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "mc.json"
    assert run(["compare-mc", "--config", cfg_path, "--out", out,
                "--threads", "2"]) == 0
    assert read_json(out)["passed"]


def test_dump_kernels(tmp_path):
    out = tmp_path / "field.csv"
    dump = tmp_path / "kernels.json"
    assert run(["solve", "--config", CONFIGS / "moving_membrane.json",
                "--out", out, "--dump-kernels", dump]) == 0
    payload = read_json(dump)
    assert payload["schema"] == "kernel-dump.v1"
    assert len(payload["mesh"]) == len(payload["w1"]) == len(payload["w2"])
    assert payload["kernels"]
