"""Report serialization contracts and the CLI surface: formats, exit codes,
config handling, manifests, reproducibility."""

import json
import math
from fractions import Fraction
from pathlib import Path

import pytest

from quickquant import cli
from quickquant.report import CheckReport, fmt_cell, rational_str, write_csv, write_json


def test_rational_and_float_formatting():
    assert rational_str(Fraction(8, 3)) == "8/3"
    assert rational_str(Fraction(4, 1)) == "4"
    assert fmt_cell(0.1) == "0.1"
    assert float(fmt_cell(1 / 3)) == 1 / 3  # shortest round-trip
    assert fmt_cell(Fraction(2, 3)) == "2/3"


def test_check_report_json_shape(tmp_path):
    rep = CheckReport(
        name="demo", value=Fraction(8, 3), reference="== 8/3", tolerance=0.0,
        passed=True, provenance="TRIVIAL",
    )
    d = rep.to_dict()
    assert set(d) == {"name", "value", "reference", "tolerance", "pass", "provenance"}
    assert d["value"] == "8/3"
    with pytest.raises(ValueError):
        CheckReport("x", 1.0, 1.0, 0.0, True, provenance="GUESS")


def test_csv_rfc4180_quoting(tmp_path):
    p = write_csv(tmp_path / "t.csv", ["a", "b"], [["x,y", 0.5]])
    assert p.read_text() == 'a,b\r\n"x,y",0.5\r\n' or p.read_text() == 'a,b\n"x,y",0.5\n'


def run_cli(args):
    return cli.main([str(a) for a in args])


def test_cli_density_contract(tmp_path):
    out = tmp_path / "f05.csv"
    code = run_cli(["density", "--t", 0.5, "--x-min", 0, "--x-max", 6, "--points", 241,
                    "--samples", 20000, "--seed", 42, "--out", out, "--no-figures"])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,x,value,std_err"
    assert len(lines) == 242
    manifest = json.loads((tmp_path / "f05.manifest.json").read_text())
    assert manifest["seed"] == 42
    assert manifest["config"]["samples"] == 20000
    assert "wall_time_s" in manifest


def test_cli_simulate_quickselect(tmp_path):
    out = tmp_path / "qs.json"
    code = run_cli(["simulate", "quickselect", "--n", 3, "--m", 2, "--reps", 50000,
                    "--seed", 1, "--out", out, "--no-figures"])
    assert code == 0
    summary = json.loads(out.read_text())
    assert abs(summary["mean"] - 8 / 3) <= summary["four_se"]
    assert summary["reference_mean"] == pytest.approx(8 / 3)


def test_cli_reproducible_across_workers(tmp_path):
    outs = []
    for tag, workers in (("a", 1), ("b", 2), ("c", 1)):
        out = tmp_path / f"d{tag}.csv"
        code = run_cli(["density", "--t", 0.4, "--points", 41, "--samples", 30000,
                        "--seed", 9, "--workers", workers, "--out", out, "--no-figures"])
        assert code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_cli_config_file_flags_win(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("t = 0.25\npoints = 11\nsamples = 5000\nno-figures = true\n")
    out = tmp_path / "cfg.csv"
    code = run_cli(["density", "--config", cfg, "--t", 0.5, "--out", out])
    assert code == 0
    rows = out.read_text().splitlines()
    assert len(rows) == 12  # points from config
    assert rows[1].startswith("0.5,")  # explicit flag beats config


def test_cli_exit_codes(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run_cli(["density", "--bogus-flag", 1])
    assert exc.value.code == 2
    code = run_cli(["density", "--t", 1.5, "--out", tmp_path / "x.csv", "--no-figures"])
    assert code == 3


def test_cli_figures_rendered(tmp_path):
    out = tmp_path / "fig.csv"
    code = run_cli(["density", "--t", 0.5, "--points", 21, "--samples", 5000,
                    "--seed", 3, "--out", out])
    assert code == 0
    assert (tmp_path / "fig.png").exists()


def test_cli_dickman_and_series(tmp_path):
    out = tmp_path / "dick.csv"
    assert run_cli(["dickman", "--x-max", 4, "--points", 41, "--out", out,
                    "--no-figures"]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "x,density,cdf"
    first = rows[1].split(",")
    assert float(first[1]) == pytest.approx(math.exp(-0.5772156649015329), abs=1e-9)

    out2 = tmp_path / "ck.csv"
    assert run_cli(["series", "--k-max", 3, "--samples", 20000, "--out", out2,
                    "--no-figures"]) == 0
    assert out2.read_text().splitlines()[0] == "k,c_value,c_err,n_samples"


def test_cli_tails_and_converge_report_paths(tmp_path):
    out = tmp_path / "mgf.csv"
    code = run_cli(["tails", "--theta-max", 1.0, "--grid-step", 5e-3,
                    "--x-list", "3,5", "--out", out])
    assert code == 0
    assert (tmp_path / "mgf_envelopes.csv").exists()
    assert json.loads((tmp_path / "mgf_bound_checks.json").read_text())
    assert (tmp_path / "mgf.png").exists() and (tmp_path / "mgf_envelopes.png").exists()

    out2 = tmp_path / "rates.csv"
    code = run_cli(["converge", "--n-list", "100,1000", "--reps-list", "5000,5000",
                    "--limit-samples", 20000, "--out", out2])
    assert code == 0
    assert out2.read_text().splitlines()[0] == "n,delta,d1,dks,bound"
    ld = json.loads((tmp_path / "rates_ld.json").read_text())
    assert {"t", "n", "m_n", "delta", "interval", "ratios"} <= set(ld)
    assert (tmp_path / "rates.png").exists()


def test_cli_validate_exit_one_on_failure(tmp_path, monkeypatch):
    from quickquant import validate as v
    from quickquant.report import CheckReport

    failing = v.SuiteResult(suite="quick", seed=1)
    failing.criteria.append(
        (1, "stub", [CheckReport("stub", 1.0, "== 0", 0.0, False, "TRIVIAL")])
    )
    monkeypatch.setattr(cli.validate, "run_suite", lambda **kw: failing)
    code = run_cli(["validate", "--suite", "quick", "--out-dir", tmp_path / "v"])
    assert code == 1


def test_cli_json_outputs_are_pure(tmp_path):
    # identical config -> byte-identical JSON (manifest may differ in timing)
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    for out in (a, b):
        assert run_cli(["simulate", "perpetuity", "--reps", 20000, "--seed", 5,
                        "--out", out, "--no-figures"]) == 0
    assert a.read_bytes() == b.read_bytes()
