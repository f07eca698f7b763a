import numpy as np
import pytest

from helpers import fixture, small_case

from rvppbid.assessment import (
    THREE_POINT, WEIBULL, ScenarioSet, SweepError, case_bands, case_scenarios, compare_models,
    generate_scenarios, histogram, out_of_sample_evaluate, parse_grid, possible_unfeasible,
    saturation_point, sweep_budgets, worst_hours,
)
from rvppbid.assessment.sweep import sweep_budgets_for
from rvppbid.domain import BudgetSet, ForecastBand, case_from_dict, case_to_dict
from rvppbid.formulation import BASELINE23, DETERMINISTIC, PROPOSED
from rvppbid.sequence import run_session


def fixed_scenarios(bands, rows):
    """Scenario set with explicit values; ``rows`` maps name -> list of per-scenario series."""
    values = {k: np.asarray(rows.get(k, [b.median]), float) for k, b in bands.items()}
    n = {v.shape[0] for v in values.values()}
    assert len(n) == 1
    return ScenarioSet(n.pop(), "fixed", None, values, bands)


def one_wind(T=1, median=10.0, neg=4.0, kappa=0.0):
    return case_from_dict({
        "name": "w", "periods": T,
        "fleet": {"ndres": [{"id": "wind", "p_max": 50, "forecast": {
            "median": [median] * T, "pos_dev": [0] * T, "neg_dev": [neg] * T}}]},
        "sessions": [{"kind": "DAM_SRM", "kappa": kappa, "prices": {
            "da": {"median": [50] * T, "pos_dev": [5] * T, "neg_dev": [5] * T},
            "sr_up": {"median": [10] * T, "pos_dev": [1] * T, "neg_dev": [1] * T},
            "sr_down": {"median": [10] * T, "pos_dev": [1] * T, "neg_dev": [1] * T}}}]})


# -- scenario generation -----------------------------------------------------------
def test_zero_width_band_reproduces_median():
    band = ForecastBand(np.array([1.0, 2.0, 3.0]), np.zeros(3), np.zeros(3))
    for gen in (THREE_POINT, WEIBULL):
        s = generate_scenarios({"x": band}, 50, gen, seed=1)
        assert np.all(s.values["x"] == band.median)


def test_scenarios_stay_in_band(case):
    for gen in (THREE_POINT, WEIBULL):
        s = case_scenarios(case, 200, gen, seed=3)
        for name, band in s.bands.items():
            v = s.values[name]
            assert np.all(v >= band.lower - 1e-12) and np.all(v <= band.upper + 1e-12)


def test_three_point_mean_converges():
    band = ForecastBand(np.full(4, 10.0), np.full(4, 3.0), np.full(4, 6.0))
    s = generate_scenarios({"x": band}, 10_000, THREE_POINT, seed=0)
    expected = (4 + 10 + 13) / 3
    assert np.all(np.abs(s.values["x"].mean(axis=0) - expected) / expected < 0.02)


def test_weibull_hits_both_edges():
    band = ForecastBand(np.full(2, 10.0), np.full(2, 4.0), np.full(2, 4.0))
    s = generate_scenarios({"x": band}, 5000, WEIBULL, seed=0)
    v = s.values["x"]
    assert v.min() == pytest.approx(6.0) and v.max() == pytest.approx(14.0)
    # 1% clipped at each end, roughly
    assert 0.003 < np.mean(v == 6.0) < 0.03


def test_seed_fixes_scenarios(case):
    a = case_scenarios(case, 20, seed=9)
    b = case_scenarios(case, 20, seed=9)
    c = case_scenarios(case, 20, seed=10)
    assert all(np.array_equal(a.values[k], b.values[k]) for k in a.values)
    assert any(not np.array_equal(a.values[k], c.values[k]) for k in a.values)


@pytest.mark.parametrize("kw", [{"probabilities": (0.5, 0.5, 0.5)}, {"probabilities": (-0.1, 0.6, 0.5)},
                                {"shape": 0}, {"generator": "normal"}])
def test_invalid_generator_settings(kw):
    band = ForecastBand(np.ones(2), np.ones(2), np.ones(2))
    with pytest.raises(ValueError):
        generate_scenarios({"x": band}, 5, **kw)


def test_case_band_names(case):
    names = list(case_bands(case))
    assert names[:3] == ["price:da", "price:sr_up", "price:sr_down"]
    assert "ndres:wind" in names and "stu:stu" in names and "demand:load:0" in names


# -- recourse ----------------------------------------------------------------------
def _no_demand_reserve(case):
    d = case_to_dict(case)
    for u in d["fleet"]["demand"]:
        u["flex_up"] = u["flex_down"] = 0.0
    return case_from_dict(d)


def test_median_realization_costs_nothing(case):
    cfg = _no_demand_reserve(case)
    e, _ = run_session(cfg, "DAM_SRM", None, DETERMINISTIC)
    assert e.r_up.max() > 0 and e.r_dn.max() > 0
    rep = out_of_sample_evaluate(cfg, e, fixed_scenarios(case_bands(cfg), {}))
    assert rep.penalty_av == pytest.approx(0, abs=1e-6)
    assert rep.profit_av == pytest.approx(e.objective, rel=1e-6)


def test_demand_reserve_capped_by_profile_deviation(case, dam_det):
    # the recourse caps demand reserve by flex * positive deviation of the chosen profile,
    # which is far below the flex * consumption the bid was built on
    e, _ = dam_det
    load = case.demand[0]
    assert np.max(e.unit_r_up[load.id]) > np.max(load.flex_up * load.profiles[e.profiles[load.id]].pos_dev)
    rep = out_of_sample_evaluate(case, e, fixed_scenarios(case_bands(case), {}))
    assert rep.penalty_av > 0


def test_one_mwh_short_costs_z():
    cfg = one_wind()
    e, _ = run_session(cfg, "DAM_SRM", None, DETERMINISTIC)
    assert e.p_trade[0] == pytest.approx(10)
    bands = case_bands(cfg)
    rep = out_of_sample_evaluate(cfg, e, fixed_scenarios(bands, {"ndres:wind": [[9.0]]}), Z=1000)
    assert rep.penalty_av == pytest.approx(1000)
    assert rep.shortfall_mwh[0] == pytest.approx(1)


def test_surplus_is_spilled_for_free():
    cfg = one_wind()
    e, _ = run_session(cfg, "DAM_SRM", None, DETERMINISTIC)
    rep = out_of_sample_evaluate(cfg, e, fixed_scenarios(case_bands(cfg), {"ndres:wind": [[10.0]]}))
    assert rep.penalty_av == 0


def test_robust_bid_has_no_shortfall_inside_the_band():
    cfg = one_wind(T=3, median=10, neg=4)
    d = case_to_dict(cfg)
    d["budgets"] = {"DAM_SRM": {"units": {"wind": 3}}}
    cfg = case_from_dict(d)
    e, _ = run_session(cfg, "DAM_SRM", None, PROPOSED)
    s = case_scenarios(cfg, 50, seed=4)
    assert out_of_sample_evaluate(cfg, e, s).penalty_av == pytest.approx(0, abs=1e-9)


def test_scenario_order_does_not_change_averages(case, dam_prop):
    s = case_scenarios(case, 30, seed=2)
    perm = np.random.default_rng(0).permutation(30)
    t = ScenarioSet(30, s.generator, s.seed, {k: v[perm] for k, v in s.values.items()}, s.bands)
    a = out_of_sample_evaluate(case, dam_prop[0], s)
    b = out_of_sample_evaluate(case, dam_prop[0], t)
    assert a.profit_av == b.profit_av and a.penalty_av == b.penalty_av
    np.testing.assert_allclose(a.profit[perm], b.profit, rtol=1e-9, atol=1e-6)


def test_report_identities(case, dam_det):
    rep = out_of_sample_evaluate(case, dam_det[0], case_scenarios(case, 25, seed=1))
    assert np.all(rep.penalty >= 0)
    assert rep.net == pytest.approx(rep.profit_av - rep.penalty_av)
    np.testing.assert_allclose(rep.penalty, rep.energy_penalty + rep.reserve_penalty)
    assert len(rep.rows()) == 25 and rep.rows()[0][0] == 1
    d = rep.to_dict()
    assert set(d["histograms"]) == {"profit", "penalty", "net"}
    assert sum(d["histograms"]["profit"]["counts"]) == 25


def test_engines_agree(case, dam_prop):
    s = case_scenarios(case, 8, seed=5)
    a = out_of_sample_evaluate(case, dam_prop[0], s, engine="simplex")
    b = out_of_sample_evaluate(case, dam_prop[0], s, engine="highs")
    np.testing.assert_allclose(a.penalty, b.penalty, rtol=1e-6, atol=1e-4)
    np.testing.assert_allclose(a.profit, b.profit, rtol=1e-6, atol=1e-4)


def test_bad_assessment_inputs(case, dam_det):
    s = case_scenarios(case, 2)
    with pytest.raises(ValueError):
        out_of_sample_evaluate(case, dam_det[0], s, Z=0)


def test_histogram_with_identical_values():
    h = histogram([3.0] * 7)
    assert h.counts.tolist() == [7] and len(h.edges) == 2


def test_histogram_counts_everything():
    x = np.random.default_rng(0).normal(size=300)
    h = histogram(x)
    assert h.counts.sum() == 300 and h.edges[0] <= x.min() and h.edges[-1] >= x.max()


# -- sweeps ------------------------------------------------------------------------
def test_grid_zero_equals_deterministic(case, dam_det):
    for which in ("energy", "price", "price_energy"):
        res = sweep_budgets(case, [0], which)
        assert res.profits[0] == pytest.approx(dam_det[0].objective, rel=1e-9)


def test_full_energy_budget_caps_at_worst_case():
    d = small_case(np.random.default_rng(11), 4, kappa=0.0)
    cfg = case_from_dict(d)
    res = sweep_budgets(cfg, [4], "energy")
    u = d["fleet"]["ndres"][0]["forecast"]
    u["median"] = (np.array(u["median"]) - np.array(u["neg_dev"])).tolist()
    u["neg_dev"] = [0.0] * 4
    det, _ = run_session(case_from_dict(d), "DAM_SRM", None, DETERMINISTIC)
    assert res.profits[0] == pytest.approx(det.objective, rel=1e-7)


def test_sweep_budgets_are_clamped(case):
    b = sweep_budgets_for(case, 24, "price_energy")
    assert set(b.price.values()) == {24.0}
    for uid, g in b.unit.items():
        assert g <= 24


def test_sweep_rejects_bad_grids(case):
    with pytest.raises(ValueError):
        sweep_budgets(case, [], "energy")
    with pytest.raises(ValueError):
        sweep_budgets(case, [25], "energy")
    with pytest.raises(ValueError):
        sweep_budgets(case, [1], "nonsense")


def test_sweep_infeasible_point_names_the_budget():
    d = small_case(np.random.default_rng(2), 2)
    d["fleet"]["ndres"][0]["p_min"] = 1000.0
    d["fleet"]["ndres"][0]["p_max"] = 1000.0
    with pytest.raises((SweepError, ValueError)):
        sweep_budgets(case_from_dict(d), [0, 1], "energy")


def test_parse_grid():
    assert parse_grid("0:4") == [0, 1, 2, 3, 4]
    assert parse_grid("0:1:0.25") == [0, 0.25, 0.5, 0.75, 1]
    assert parse_grid("0, 2,5") == [0, 2, 5]
    for bad in ("", "  ", "3:1", "0:4:0", "1:2:3:4"):
        with pytest.raises(ValueError):
            parse_grid(bad)


def test_saturation_point():
    assert saturation_point([0, 1, 2, 3], [10, 8, 8, 8]) == 1
    assert saturation_point([0, 1, 2, 3], [10, 9, 8, 7]) is None
    assert saturation_point([0, 1, 2], [5, 5, 5]) == 0
    assert saturation_point([0], [5]) == 0


# -- comparison --------------------------------------------------------------------
def test_possible_unfeasible_zero_for_worst_case_schedule():
    cfg = one_wind(T=2, median=10, neg=4)
    e, _ = run_session(cfg, "DAM_SRM", None, DETERMINISTIC)
    area = possible_unfeasible(cfg, e)["wind"]
    np.testing.assert_allclose(area, [4, 4])


def test_worst_hours_ties_to_earlier(case):
    cfg = fixture("symmetric")
    uid = cfg.ndres[0].id
    band = cfg.ndres[0].forecast("DAM_SRM")
    h = worst_hours(cfg, uid, 5)
    assert len(h) == 5 and np.all(np.diff(h) > 0)
    assert band.neg_dev[h].min() >= np.delete(band.neg_dev, h).max()


def test_comparison_at_zero_budget(case, dam_det):
    res = compare_models(case, BudgetSet({}, {}))
    assert res.proposed.objective == pytest.approx(dam_det[0].objective, rel=1e-9)
    # the baseline prices at the band mean, not the median
    assert res.baseline.objective != pytest.approx(res.proposed.objective, rel=1e-6)


def test_comparison_on_symmetric_case():
    cfg = fixture("symmetric")
    res = compare_models(cfg, scenarios=case_scenarios(cfg, 10, seed=0), curve_grid=[0, 5])
    uid = cfg.ndres[0].id
    g = int(cfg.budgets_for("DAM_SRM").unit[uid])
    prop, base = res.area_on(uid, worst_hours(cfg, uid, g))
    assert prop == pytest.approx(0, abs=1e-6) and base > 0
    d = res.to_dict()
    assert set(d["assessment"]) == {PROPOSED, BASELINE23} and set(d["curves"]) == {PROPOSED, BASELINE23}
    assert res.csv_rows()[0][:3] == ["t", "p_proposed", "p_baseline"]


def test_penalty_non_increasing_in_each_unit_budget(case):
    # statistical check over three seeds; demand reserve is switched off because the
    # recourse caps it by the profile deviation, which swamps the trend (see the ledger)
    cfg = _no_demand_reserve(case)
    base = cfg.budgets_for("DAM_SRM")
    sets = [case_scenarios(cfg, 100, seed=s) for s in range(3)]
    for uid in cfg.unit_ids:
        bids = []
        for g in (0, 3, 6, 12):
            unit = dict(base.unit)
            unit[uid] = g
            bids.append(run_session(cfg, "DAM_SRM", None, PROPOSED, BudgetSet(dict(base.price), unit))[0])
        for s in sets:
            k = [out_of_sample_evaluate(cfg, e, s, engine="highs").penalty_av for e in bids]
            assert all(b <= a + 1e-6 * max(1.0, a) for a, b in zip(k, k[1:])), (uid, s.seed, k)
