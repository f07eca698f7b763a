import json

import numpy as np
import pytest

from helpers import fixture, fixture_path

from rvppbid.domain import (
    BudgetSet, ConfigError, ForecastBand, LengthMismatchError, case_from_dict, case_to_dict, load_case,
    positive_deviation_count, validate_case,
)


def minimal_dict(**over):
    d = {"name": "m", "periods": 2, "fleet": {"ndres": [{"id": "pv", "p_max": 10,
         "forecast": {"median": [8, 6], "pos_dev": [1, 1], "neg_dev": [2, 3]}}]},
         "sessions": [{"kind": "DAM_SRM", "kappa": 0.0, "prices": {
             "da": {"median": [40, 50], "pos_dev": [5, 5], "neg_dev": [10, 10]},
             "sr_up": {"median": [1, 1], "pos_dev": [0, 0], "neg_dev": [0, 0]},
             "sr_down": {"median": [1, 1], "pos_dev": [0, 0], "neg_dev": [0, 0]}}}]}
    d.update(over)
    return d


def test_minimal_config_loads_with_two_periods():
    cfg = fixture("minimal")
    assert cfg.period_count == 2
    assert [u.id for u in cfg.ndres] == ["pv"]


def test_case_study_fleet_matches_published_ratings(case):
    wind, solar = case.ndres
    (stu,) = case.stu
    (load,) = case.demand
    assert (wind.p_max, wind.op_cost) == (50, 10)
    assert (solar.p_max, solar.op_cost) == (50, 5)
    assert (stu.p_max, stu.storage_capacity, stu.op_cost) == (50, 1100, 15)
    assert (load.min_daily_energy, load.p_max) == (360, 30)
    assert validate_case(case).ok


def test_short_series_is_a_length_mismatch():
    d = minimal_dict()
    d["fleet"]["ndres"][0]["forecast"]["median"] = [8]
    with pytest.raises(LengthMismatchError) as exc:
        case_from_dict(d)
    assert "median" in str(exc.value)


def test_length_23_against_24():
    d = json.loads(open(fixture_path("case_study")).read())
    d["fleet"]["ndres"][0]["forecast"]["DAM_SRM"]["neg_dev"] = d["fleet"]["ndres"][0]["forecast"]["DAM_SRM"]["neg_dev"][:23]
    with pytest.raises(LengthMismatchError):
        case_from_dict(d)


def test_bad_json_reports_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n "periods": 2,\n oops\n}')
    with pytest.raises(ConfigError) as exc:
        load_case(p)
    assert exc.value.line == 3


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        load_case("/definitely/not/here.json")


def test_round_trip_through_dict(case):
    again = case_from_dict(case_to_dict(case))
    assert case_to_dict(again) == case_to_dict(case)


def test_solar_budget_clamped_to_daylight_hours(case):
    assert positive_deviation_count(case, "solar", "DAM_SRM") == 10
    d = json.loads(open(fixture_path("case_study")).read())
    d["budgets"]["DAM_SRM"]["units"]["solar"] = 15
    rep = validate_case(case_from_dict(d))
    clamps = [f for f in rep.warnings if f.code == "budget_clamp"]
    assert len(clamps) == 1 and "solar" in clamps[0].message
    assert rep.case.budgets_for("DAM_SRM").unit_budget("solar") == 10
    assert rep.ok


def test_all_zero_deviations_give_empty_report():
    d = minimal_dict()
    d["fleet"]["ndres"][0]["forecast"].update(pos_dev=[0, 0], neg_dev=[0, 0])
    d["sessions"][0]["prices"]["da"].update(pos_dev=[0, 0], neg_dev=[0, 0])
    d["budgets"] = {"DAM_SRM": {"da": 0, "sr_up": 0, "sr_down": 0, "units": {"pv": 0}}}
    assert validate_case(case_from_dict(d)).findings == []


def test_kappa_above_one_blocks():
    d = minimal_dict()
    d["sessions"][0]["kappa"] = 1.2
    rep = validate_case(case_from_dict(d))
    assert not rep.ok
    assert [f.code for f in rep.errors] == ["kappa"]


def test_negative_lower_edge_of_power_band():
    d = minimal_dict()
    d["fleet"]["ndres"][0]["forecast"]["neg_dev"] = [9, 3]
    rep = validate_case(case_from_dict(d))
    assert any(f.code == "band" for f in rep.errors)


def test_buying_with_zero_upward_price_deviation_rejected():
    cfg = fixture("case_study")
    d = case_to_dict(cfg)
    d["sessions"][0]["prices"]["da"]["pos_dev"][3] = 0.0
    rep = validate_case(case_from_dict(d))
    assert any(f.code == "price_band" for f in rep.errors)


def test_out_of_order_sessions_rejected(case):
    d = case_to_dict(case)
    d["sessions"] = [d["sessions"][1], d["sessions"][0]]
    rep = validate_case(case_from_dict(d))
    assert any(f.code == "sessions" for f in rep.errors)


def test_validation_is_idempotent(case):
    d = case_to_dict(case)
    d["budgets"]["DAM_SRM"]["units"]["solar"] = 20
    first = validate_case(case_from_dict(d))
    second = validate_case(first.case)
    assert [f for f in second.findings if f.code != "budget_clamp"] == [
        f for f in first.findings if f.code != "budget_clamp"]
    assert not [f for f in second.findings if f.code == "budget_clamp"]


def test_band_edges():
    b = ForecastBand(np.array([10.0, 5.0]), np.array([1.0, 2.0]), np.array([3.0, 0.0]))
    assert b.lower.tolist() == [7.0, 5.0]
    assert b.upper.tolist() == [11.0, 7.0]


def test_budget_accessors():
    b = BudgetSet({"da": 2.5}, {"wind": 3})
    assert b.gamma_da == 2.5 and b.gamma_sr_up == 0.0
    assert b.unit_budget("wind") == 3 and b.unit_budget("x") == 0


def test_csv_series(tmp_path):
    (tmp_path / "pv.csv").write_text("t,median,pos_dev,neg_dev\n1,8,1,2\n2,6,1,3\n")
    d = minimal_dict()
    d["fleet"]["ndres"][0]["forecast"] = {"csv": "pv.csv"}
    p = tmp_path / "c.json"
    p.write_text(json.dumps(d))
    cfg = load_case(p)
    assert cfg.ndres[0].forecast("DAM_SRM").neg_dev.tolist() == [2.0, 3.0]
