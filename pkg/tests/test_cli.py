import csv
import json
import subprocess
import sys

import pytest

from helpers import fixture_path

from rvppbid.cli import EXIT_INVALID, EXIT_OK, EXIT_SOLVER, EXIT_USAGE, main

CASE = str(fixture_path("case_study"))


def write_case(tmp_path, mutate, name="case.json"):
    d = json.loads(open(fixture_path("case_study")).read())
    mutate(d)
    p = tmp_path / name
    p.write_text(json.dumps(d))
    return str(p)


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_validate_ok():
    assert main(["validate", CASE]) == EXIT_OK


def test_validate_reports_bad_kappa(tmp_path, capsys):
    p = write_case(tmp_path, lambda d: d["sessions"][0].update(kappa=1.2))
    assert main(["validate", p]) == EXIT_INVALID
    assert "[kappa]" in capsys.readouterr().out


def test_missing_session_forecast_is_invalid(tmp_path):
    p = write_case(tmp_path, lambda d: d["sessions"][2]["prices"].pop("id"))
    assert main(["sequence", p, "--out", str(tmp_path / "o")]) == EXIT_INVALID


def test_usage_errors(tmp_path):
    assert main(["validate", str(tmp_path / "nope.json")]) == EXIT_USAGE
    assert main(["assess", CASE, "--n", "0", "--out", str(tmp_path)]) == EXIT_USAGE
    assert main(["sweep", CASE, "--grid", "", "--out", str(tmp_path)]) == EXIT_USAGE
    assert main(["bid", CASE, "--session", "IDM_9", "--out", str(tmp_path)]) == EXIT_USAGE
    assert main(["frobnicate"]) == EXIT_USAGE


def test_infeasible_case_exits_three(tmp_path):
    # a must-run remote unit behind a line too small to carry its output
    zero = [0.0] * 2
    d = {"name": "stuck", "periods": 2,
         "fleet": {"ndres": [{"id": "r", "p_min": 25, "p_max": 50,
                              "forecast": {"median": [30.0] * 2, "pos_dev": zero, "neg_dev": zero}}]},
         "sessions": [{"kind": "DAM_SRM", "kappa": 0, "prices": {
             s: {"median": [50.0] * 2, "pos_dev": [1.0] * 2, "neg_dev": [1.0] * 2}
             for s in ("da", "sr_up", "sr_down")}}],
         "network": {"buses": [{"id": "m", "main": True}, {"id": "x"}],
                     "lines": [{"id": "L", "from": "x", "to": "m", "reactance": 0.1, "capacity": 20}],
                     "reference_bus": "m", "unit_bus": {"r": "x"}}}
    p = tmp_path / "stuck.json"
    p.write_text(json.dumps(d))
    assert main(["validate", str(p)]) == EXIT_OK
    assert main(["bid", str(p), "--mode", "deterministic", "--out", str(tmp_path / "o")]) == EXIT_SOLVER


def test_bid_outputs(tmp_path):
    out = tmp_path / "bid"
    assert main(["bid", CASE, "--out", str(out), "--export-mps"]) == EXIT_OK
    for name in ("bid_DAM_SRM.json", "DAM_SRM.csv", "DAM_SRM_proposed.mps", "manifest.json"):
        assert (out / name).exists(), name
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "bid" and man["backend"] == "reference"
    assert len(read_csv(out / "DAM_SRM.csv")) == 25


def test_gamma_overrides_change_the_bid(tmp_path):
    main(["bid", CASE, "--out", str(tmp_path / "a"), "--gamma-price", "0", "--gamma-unit", "0"])
    main(["bid", CASE, "--out", str(tmp_path / "b"), "--mode", "deterministic"])
    a = json.loads((tmp_path / "a" / "bid_DAM_SRM.json").read_text())["sessions"][0]
    b = json.loads((tmp_path / "b" / "bid_DAM_SRM.json").read_text())["sessions"][0]
    assert a["objective"] == pytest.approx(b["objective"], rel=1e-5)


def test_sequence_then_starred_bid(tmp_path):
    out = tmp_path / "seq"
    assert main(["sequence", CASE, "--out", str(out), "--sessions", "DAM_SRM"]) == EXIT_OK
    assert main(["bid", CASE, "--session", "SRM_IDM1", "--starred", str(out / "schedule.json"),
                 "--out", str(tmp_path / "srm")]) == EXIT_OK
    assert (tmp_path / "srm" / "SRM_IDM1.csv").exists()


def test_sweep_writes_25_rows(tmp_path):
    assert main(["sweep", CASE, "--which", "energy", "--out", str(tmp_path)]) == EXIT_OK
    rows = read_csv(tmp_path / "sweep_energy.csv")
    assert rows[0][:2] == ["budget", "profit"] and len(rows) == 26


def test_assess_is_reproducible(tmp_path):
    args = ["assess", CASE, "--n", "20", "--seed", "3"]
    assert main([*args, "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main([*args, "--out", str(tmp_path / "b")]) == EXIT_OK
    for name in ("assessment.json", "assessment_scenarios.csv", "assessment_hist_net.csv", "bids.json"):
        assert (tmp_path / "a" / name).read_text() == (tmp_path / "b" / name).read_text(), name
    rows = read_csv(tmp_path / "a" / "assessment_scenarios.csv")
    assert rows[0] == ["scenario", "profit", "penalty"] and len(rows) == 21


def test_assess_from_bids_file(tmp_path):
    main(["assess", CASE, "--n", "5", "--out", str(tmp_path / "a")])
    assert main(["assess", CASE, "--n", "5", "--bids", str(tmp_path / "a" / "bids.json"),
                 "--out", str(tmp_path / "b")]) == EXIT_OK
    a = json.loads((tmp_path / "a" / "assessment.json").read_text())
    b = json.loads((tmp_path / "b" / "assessment.json").read_text())
    assert b["net"] == pytest.approx(a["net"], rel=1e-4)


def test_compare_outputs(tmp_path):
    assert main(["compare", str(fixture_path("symmetric")), "--n", "5", "--grid", "0,5",
                 "--out", str(tmp_path)]) == EXIT_OK
    d = json.loads((tmp_path / "comparison.json").read_text())
    assert set(d["objective"]) == {"proposed", "baseline23"}
    assert (tmp_path / "curve_proposed.csv").exists() and (tmp_path / "curve_baseline23.csv").exists()


def test_console_script_runs():
    r = subprocess.run([sys.executable, "-m", "rvppbid.cli", "validate", CASE], capture_output=True, text=True)
    assert r.returncode == 0
    r = subprocess.run([sys.executable, "-m", "rvppbid.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip()
