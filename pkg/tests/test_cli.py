import csv
import json
import subprocess
import sys

import pytest

from nudec import cli, experiments, suites


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_region_on_toy(tmp_path, capsys):
    code, out, _ = run(capsys, "region", "--config", "toy_inside", "--out-dir", str(tmp_path))
    assert code == 0
    assert "verdict: equal" in out
    rows = read_csv(tmp_path / "halfplanes.csv")
    got = [(int(r["a"]), int(r["b"]), float(r["c"])) for r in rows if r["region"] == "nonunique"]
    assert got == list(experiments.region_report(suites.load("toy_inside"))["nonunique"].halfplanes)
    assert json.loads((tmp_path / "comparison.json").read_text())["comparison"]["verdict"] == "equal"
    assert read_csv(tmp_path / "vertices.csv")


def test_region_on_interference_scenario(tmp_path, capsys):
    code, _, _ = run(capsys, "region", "--config", "xor_ic", "--out-dir", str(tmp_path))
    rep = json.loads((tmp_path / "ic_bounds.json").read_text())
    assert code == 0 and rep["threshold_r1"] == pytest.approx(0.75)


def test_simulate_is_reproducible(tmp_path, capsys):
    outs = []
    for d in ("a", "b"):
        code, stdout, _ = run(capsys, "simulate", "--config", "noisy", "--trials", "5", "--out-dir", str(tmp_path / d))
        assert code == 0
        outs.append((tmp_path / d / "stats.csv").read_bytes())
    assert outs[0] == outs[1]
    assert outs[0].decode() == stdout
    rows = read_csv(tmp_path / "a" / "stats.csv")
    assert {r["decoder"] for r in rows} >= {"y1", "y2_nonunique", "y3_aux"}
    assert all(r["trials"] == "5" for r in rows)


def test_seed_override_changes_output(tmp_path, capsys):
    run(capsys, "simulate", "--config", "noisy", "--trials", "20", "--out-dir", str(tmp_path / "a"))
    run(capsys, "simulate", "--config", "noisy", "--trials", "20", "--seed", "99", "--out-dir", str(tmp_path / "b"))
    assert (tmp_path / "a" / "stats.csv").read_bytes() != (tmp_path / "b" / "stats.csv").read_bytes()


def test_sweep(tmp_path, capsys):
    code, _, _ = run(capsys, "sweep", "--config", "xor_ic", "--param", "R1", "--values", "0.25", "0.5",
                     "--trials", "3", "--out-dir", str(tmp_path))
    rows = read_csv(tmp_path / "sweep.csv")
    assert code == 0 and len(rows) == 12
    assert {r["value"] for r in rows} == {"0.25", "0.5"} and rows[0]["param"] == "R1"


def test_sweep_rejects_wrong_param_for_kind(tmp_path, capsys):
    code, _, err = run(capsys, "sweep", "--config", "xor_ic", "--param", "T2", "--values", "0.1",
                       "--out-dir", str(tmp_path / "o"))
    assert code == 1 and "T2" in err and not (tmp_path / "o").exists()


def test_bins(tmp_path, capsys):
    code, _, _ = run(capsys, "bins", "--config", "bins", "--out-dir", str(tmp_path))
    assert code == 0
    assert len(read_csv(tmp_path / "bins.csv")) == 500
    rep = json.loads((tmp_path / "concentration.json").read_text())
    assert rep["passed"] and rep["alpha1"] == pytest.approx(0.3512787292998718)


def test_verify_pointwise_on_toy(tmp_path, capsys):
    code, out, _ = run(capsys, "verify", "--suite", "pointwise", "--config", "toy_inside", "--out-dir", str(tmp_path))
    assert code == 0 and "verify: PASS" in out
    assert json.loads((tmp_path / "verify.json").read_text())[0]["passed"]


def test_verify_exits_one_on_failure(tmp_path, capsys):
    # the toy halfplane check inside the projection suite does not hold
    code, out, _ = run(capsys, "verify", "--suite", "projection", "--config", "toy_inside", "--out-dir", str(tmp_path))
    assert code == 1 and "FAIL projection/toy_halfplanes" in out


def test_unknown_flag_writes_nothing(tmp_path, capsys):
    out_dir = tmp_path / "o"
    code, _, err = run(capsys, "simulate", "--config", "toy_inside", "--bogus", "--out-dir", str(out_dir))
    assert code == 2 and "usage" in err and not out_dir.exists()
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys)[0] == 2
    assert run(capsys, "simulate", "--config", "toy_inside", "--trials", "0", "--out-dir", str(out_dir))[0] == 2
    assert not out_dir.exists()


def test_bad_config_reports_path(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    obj = json.loads((suites.config.scenario_path("noisy")).read_text())
    obj["source"]["probs"][0][0][0][0] = 0.5
    bad.write_text(json.dumps(obj))
    code, _, err = run(capsys, "simulate", "--config", str(bad), "--out-dir", str(tmp_path / "o"))
    assert code == 1 and "$.source.probs" in err and not (tmp_path / "o").exists()
    code, _, err = run(capsys, "simulate", "--config", str(tmp_path / "missing.json"), "--out-dir", str(tmp_path / "o"))
    assert code == 1 and not (tmp_path / "o").exists()


def test_scenarios_listing(capsys):
    code, out, _ = run(capsys, "scenarios")
    assert code == 0 and "toy_inside" in out.split()


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "nudec", "scenarios"], capture_output=True, text=True)
    assert res.returncode == 0 and "xor_ic" in res.stdout
