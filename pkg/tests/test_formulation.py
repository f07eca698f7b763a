import numpy as np
import pytest

from helpers import brute_price_reduction, fixture, small_case, small_cfg

from rvppbid.domain import BudgetSet, ForecastBand, case_from_dict, case_to_dict
from rvppbid.formulation import (
    BASELINE23, DETERMINISTIC, PROPOSED, add_price_robust_terms, build_session_model, mean_price_band,
)
from rvppbid.milp import LinExpr, ModelIR, solve_reference, verify_solution
from rvppbid.sequence import chain_sessions, run_session, update_starred
from rvppbid.formulation.bundle import StarredResults


def reduction_of(x, pos, neg, gamma, dt=1.0):
    """Optimal robust reduction for fixed trades, read off the model's LP."""
    m = ModelIR()
    band = ForecastBand(np.zeros(len(x)), np.asarray(pos, float), np.asarray(neg, float))
    terms = add_price_robust_terms(m, "s", {t: LinExpr(const=float(v)) for t, v in enumerate(x)}, band,
                                   gamma, signed=True, delta_t=dt)
    m.add_objective(-terms.reduction)
    sol = solve_reference(m)
    assert sol.ok
    return -sol.objective


# -- price protection -----------------------------------------------------------
@pytest.mark.parametrize("gamma,expected", [(0, 0), (1, 4), (1.5, 5), (2, 6)])
def test_price_reduction_examples(gamma, expected):
    assert reduction_of([1, 1], [1, 1], [2, 4], gamma) == pytest.approx(expected)
    assert brute_price_reduction([1, 1], [1, 1], [2, 4], gamma) == pytest.approx(expected)


def test_buyer_loses_upward_deviation():
    assert reduction_of([-1], [5], [2], 1) == pytest.approx(5)
    assert brute_price_reduction([-1], [5], [2], 1) == pytest.approx(5)


def test_reserve_stream_needs_no_sign_link():
    m = ModelIR()
    band = ForecastBand(np.zeros(2), np.ones(2), np.array([3.0, 1.0]))
    terms = add_price_robust_terms(m, "sr_up", {0: LinExpr(const=2.0), 1: LinExpr(const=5.0)}, band, 1,
                                   signed=False)
    assert terms.y == {}
    m.add_objective(-terms.reduction)
    assert -solve_reference(m).objective == pytest.approx(6)


def test_zero_budget_gives_median_income(case):
    b0 = BudgetSet({}, {})
    e, bundle = run_session(case, "DAM_SRM", None, PROPOSED, b0)
    for k, v in e.decomposition.items():
        if k.startswith("robust_"):
            assert v == pytest.approx(0, abs=1e-9)


# -- session assembly -----------------------------------------------------------
def test_deterministic_equals_zero_budget_proposed(case, dam_det):
    e0, _ = run_session(case, "DAM_SRM", None, PROPOSED, BudgetSet({}, {}))
    assert e0.objective == pytest.approx(dam_det[0].objective, rel=1e-6)


def test_dam_with_budgets_five_reports_price_reductions(dam_prop):
    e, _ = dam_prop
    for stream in ("da", "sr_up", "sr_down"):
        assert e.decomposition[f"robust_{stream}"] < 0


def test_decomposition_sums_to_objective(dam_prop, dam_det):
    for e, _ in (dam_prop, dam_det):
        assert sum(e.decomposition.values()) == pytest.approx(e.objective, abs=1e-9 * max(1, abs(e.objective)))


def test_srm_idm1_objective_has_no_day_ahead_income(case, dam_prop):
    starred = update_starred(StarredResults(case.period_count), dam_prop[0])
    b = build_session_model(case, "SRM_IDM1", starred)
    assert "income_da" not in b.terms
    assert "income_id" in b.terms
    p_da = {v.name for v in b.model.variables if v.name.startswith("p_da[")}
    assert not p_da


def test_sell_hours_pattern(dam_det, case):
    e, _ = dam_det
    sold = np.flatnonzero(e.p_trade > 1.0) + 1
    assert sold.min() <= 9 and sold.max() >= 22
    assert np.all(e.p_trade[8:22] > 0)


# -- reserves and trade limits -----------------------------------------------------
def test_reserve_ratio_and_share(dam_prop, case):
    e, _ = dam_prop
    rho = case.session("DAM_SRM").rho
    assert np.array_equal(e.r_up, e.r_up)  # no NaN
    assert np.max(np.abs(e.r_up - rho * e.r_dn)) <= 1e-9 * max(1.0, np.max(e.r_dn))
    assert np.all(e.r_up <= 0.2 * 150 + 1e-9)


def test_reserve_share_cap_is_thirty(case):
    b = build_session_model(case, "DAM_SRM", mode=DETERMINISTIC)
    rows = [c for c in b.model.constraints if c.name.startswith("reserve_share[")]
    assert len(rows) == 24 and all(c.rhs == pytest.approx(30.0) for c in rows)


def test_reserve_ratio_half():
    d = small_case(np.random.default_rng(3), 3, kappa=0.5)
    d["sessions"][0]["rho"] = 0.5
    e, _ = run_session(case_from_dict(d), "DAM_SRM", None, DETERMINISTIC)
    np.testing.assert_allclose(e.r_dn, 2 * e.r_up, atol=1e-9)


def test_kappa_zero_means_no_reserve():
    e, _ = run_session(small_cfg(np.random.default_rng(4), 4, kappa=0.0), "DAM_SRM", None, DETERMINISTIC)
    assert np.all(e.r_up == 0) and np.all(e.r_dn == 0)


# -- balance -----------------------------------------------------------------------
def test_balance_one_unit_one_demand():
    d = {"name": "b", "periods": 1, "fleet": {
        "ndres": [{"id": "r", "p_min": 5, "p_max": 5, "forecast": {"median": [5], "pos_dev": [0], "neg_dev": [0]}}],
        "demand": [{"id": "d", "p_min": 0, "p_max": 10, "profiles": [{"cost": 0, "median": [3], "pos_dev": [0]}]}]},
        "sessions": [{"kind": "DAM_SRM", "kappa": 0, "prices": {
            "da": {"median": [50], "pos_dev": [1], "neg_dev": [1]},
            "sr_up": {"median": [0], "pos_dev": [0], "neg_dev": [0]},
            "sr_down": {"median": [0], "pos_dev": [0], "neg_dev": [0]}}}]}
    e, bundle = run_session(case_from_dict(d), "DAM_SRM", None, DETERMINISTIC)
    assert e.p_trade[0] == pytest.approx(2)
    assert len(bundle.balance_rows) == 3


def test_up_state_balance_with_called_reserve(dam_prop):
    e, bundle = dam_prop
    unit_up = sum(e.unit_r_up[u] for u in e.unit_r_up)
    t = int(np.argmax(e.r_up))
    assert e.r_up[t] > 0
    assert unit_up[t] == pytest.approx(e.r_up[t], abs=1e-6)


def test_idm_rows_only_inside_window(case):
    sched = chain_sessions(case, PROPOSED, keys=["DAM_SRM", "SRM_IDM1"])
    starred = StarredResults(case.period_count)
    for e in sched.entries:
        starred = update_starred(starred, e, 1.0, case.session(e.key).idm_index)
    b = build_session_model(case, "IDM_4", starred)
    periods = {int(c.name.split("[")[1].rstrip("]")) for c in b.model.constraints if c.name.startswith("balance_")}
    assert min(periods) == 13 and max(periods) == 24


# -- unit blocks -------------------------------------------------------------------
def one_unit(T, median, neg, gamma, p_max=50.0):
    return {"name": "u", "periods": T, "fleet": {"ndres": [{"id": "r", "p_max": p_max,
            "forecast": {"median": median, "pos_dev": [0] * T, "neg_dev": neg}}]},
            "sessions": [{"kind": "DAM_SRM", "kappa": 0, "prices": {
                "da": {"median": [50] * T, "pos_dev": [1] * T, "neg_dev": [1] * T},
                "sr_up": {"median": [0] * T, "pos_dev": [0] * T, "neg_dev": [0] * T},
                "sr_down": {"median": [0] * T, "pos_dev": [0] * T, "neg_dev": [0] * T}}}],
            "budgets": {"DAM_SRM": {"units": {"r": gamma}}}}


def test_active_period_cap():
    e, _ = run_session(case_from_dict(one_unit(1, [10], [4], 1)), "DAM_SRM", None, PROPOSED)
    assert e.unit_power["r"][0] == pytest.approx(6)


def test_three_capped_hours():
    rng = np.random.default_rng(0)
    med = rng.uniform(10, 20, 8).round(3).tolist()
    neg = rng.uniform(1, 5, 8).round(3).tolist()
    e, _ = run_session(case_from_dict(one_unit(8, med, neg, 3)), "DAM_SRM", None, PROPOSED)
    below = np.flatnonzero(e.unit_power["r"] < np.array(med) - 1e-9)
    assert len(below) == 3
    assert set(below) == set(np.argsort(neg)[-3:])


def test_full_deviation_zeroes_the_unit():
    e, _ = run_session(case_from_dict(one_unit(3, [4, 5, 6], [4, 5, 6], 3)), "DAM_SRM", None, PROPOSED)
    assert np.allclose(e.unit_power["r"], 0)


def test_one_profile_selected(dam_prop):
    e, bundle = dam_prop
    from rvppbid.milp import solve_reference
    sol = solve_reference(bundle.model)
    u = [sol.value(v) for v in bundle.selectors["load"]]
    assert sorted(u) == [0.0, 0.0, 1.0]


def test_min_daily_energy_enforced(dam_prop, dam_det):
    for e, _ in (dam_prop, dam_det):
        assert np.sum(e.unit_power["load"] - e.unit_r_up["load"]) >= 360 - 1e-6


def test_demand_reserve_cap_ten_percent():
    d = {"name": "f", "periods": 1, "fleet": {
        "ndres": [{"id": "r", "p_max": 50, "sr_ramp_up": 10, "sr_ramp_down": 10,
                   "forecast": {"median": [40], "pos_dev": [0], "neg_dev": [0]}}],
        "demand": [{"id": "d", "p_min": 0, "p_max": 30, "sr_ramp_up": 10, "sr_ramp_down": 10, "flex_up": 0.1,
                    "flex_down": 0.1, "profiles": [{"cost": 0, "median": [20], "pos_dev": [0]}]}]},
        "sessions": [{"kind": "DAM_SRM", "kappa": 1, "rho": 1, "prices": {
            "da": {"median": [1], "pos_dev": [1], "neg_dev": [0]},
            "sr_up": {"median": [100], "pos_dev": [0], "neg_dev": [0]},
            "sr_down": {"median": [100], "pos_dev": [0], "neg_dev": [0]}}}]}
    e, _ = run_session(case_from_dict(d), "DAM_SRM", None, DETERMINISTIC)
    assert e.unit_r_up["d"][0] == pytest.approx(2)
    assert e.unit_r_dn["d"][0] == pytest.approx(2)


def stu_case(T, sf_median, sf_neg, p_max=10.0, e0=0.0, eff=0.35, gamma=0, price=50.0):
    return {"name": "s", "periods": T, "fleet": {"stu": [{"id": "s", "p_max": p_max, "storage_capacity": 500,
            "initial_storage": e0, "pb_efficiency": eff,
            "solar_field_forecast": {"median": sf_median, "pos_dev": [0] * T, "neg_dev": sf_neg}}]},
            "sessions": [{"kind": "DAM_SRM", "kappa": 0, "prices": {
                "da": {"median": [price] * T, "pos_dev": [1] * T, "neg_dev": [1] * T},
                "sr_up": {"median": [0] * T, "pos_dev": [0] * T, "neg_dev": [0] * T},
                "sr_down": {"median": [0] * T, "pos_dev": [0] * T, "neg_dev": [0] * T}}}],
            "budgets": {"DAM_SRM": {"units": {"s": gamma}}}}


def test_storage_fills_from_solar_field():
    cfg = case_from_dict(stu_case(2, [10, 10], [0, 0], p_max=0.0))
    b = build_session_model(cfg, "DAM_SRM", mode=DETERMINISTIC)
    for t in range(2):
        b.model.fix(b.role("psf[s]")[t], 10.0)
    sol = solve_reference(b.model)
    assert sol.value(b.role("e[s]")[1]) == pytest.approx(20)


def test_full_solar_field_deviation_leaves_initial_storage():
    cfg = case_from_dict(stu_case(3, [30, 40, 50], [30, 40, 50], e0=20.0, eff=0.4, gamma=3))
    b = build_session_model(cfg, "DAM_SRM", mode=PROPOSED)
    sol = solve_reference(b.model)
    assert np.allclose(sol.value(list(b.role("psf[s]").values())), 0)
    energy = sum(sol.value(v) for v in b.role("p[s]").values())
    assert energy == pytest.approx(20 * 0.4)


def test_power_block_efficiency():
    cfg = case_from_dict(stu_case(1, [100], [0], p_max=35.0, e0=0.0, eff=0.35))
    b = build_session_model(cfg, "DAM_SRM", mode=DETERMINISTIC)
    sol = solve_reference(b.model)
    assert sol.value(b.role("p[s]")[0]) == pytest.approx(35)
    assert sol.value(b.units["s"].extra["q"][0]) == pytest.approx(100)


# -- baseline ----------------------------------------------------------------------
def test_baseline_zero_per_period_is_mean_price_deterministic(case):
    b0 = BudgetSet({}, {})
    base, _ = run_session(case, "DAM_SRM", None, BASELINE23, b0)
    d = case_to_dict(case)
    for stream, band in d["sessions"][0]["prices"].items():
        mb = mean_price_band(case.session("DAM_SRM").prices[stream])
        band["median"] = mb.median.tolist()
    det, _ = run_session(case_from_dict(d), "DAM_SRM", None, DETERMINISTIC)
    assert base.objective == pytest.approx(det.objective, rel=1e-9)


def test_even_reduction_five_over_24():
    T = 24
    d = one_unit(T, [20.0] * T, [12.0] * T, 5)
    cfg = case_from_dict(d)
    b = build_session_model(cfg, "DAM_SRM", mode=BASELINE23)
    caps = [c for c in b.model.constraints if c.name.startswith("res_cap[")]
    assert len(caps) == T and all(c.rhs == pytest.approx(20 - 2.5) for c in caps)


def test_symmetric_bands_price_terms_coincide():
    cfg = fixture("symmetric")
    b = BudgetSet({"da": 5.0}, {})
    prop, _ = run_session(cfg, "DAM_SRM", None, PROPOSED, b)
    base, _ = run_session(cfg, "DAM_SRM", None, BASELINE23, b)
    assert prop.objective == pytest.approx(base.objective, rel=1e-9)


# -- full-budget price bound -------------------------------------------------------
def test_full_price_budget_equals_worst_price_deterministic():
    d = small_case(np.random.default_rng(7), 4, kappa=0.0, gamma_price=4.0)
    cfg = case_from_dict(d)
    rob, _ = run_session(cfg, "DAM_SRM", None, PROPOSED)
    assert np.all(rob.p_trade >= -1e-9)  # no demand, so only sales
    for band in d["sessions"][0]["prices"].values():
        band["median"] = (np.array(band["median"]) - np.array(band["neg_dev"])).tolist()
    det, _ = run_session(case_from_dict(d), "DAM_SRM", None, DETERMINISTIC)
    assert rob.objective == pytest.approx(det.objective, rel=1e-6)


# -- network -----------------------------------------------------------------------
def test_dc_flow_relation():
    cfg = fixture("two_bus")
    e, bundle = run_session(cfg, "DAM_SRM", None, DETERMINISTIC)
    from rvppbid.milp import solve_reference
    sol = solve_reference(bundle.model)
    f = sol.value(bundle.role("flow_0[L1]")[12])
    d_remote = sol.values[bundle.model.index_of("delta[remote,0,13]")]
    assert f == pytest.approx(d_remote / 0.1)
    # a 0.02 rad angle difference carries 0.2 MW on X = 0.1
    assert 0.02 / 0.1 == pytest.approx(0.2)


def test_single_bus_network_is_neutral(case):
    d = case_to_dict(case)
    d["network"] = {"buses": [{"id": "b", "main": True}], "lines": [], "reference_bus": "b",
                    "unit_bus": {u: "b" for u in case.unit_ids}}
    plain, _ = run_session(case, "DAM_SRM", None, DETERMINISTIC)
    net, _ = run_session(case_from_dict(d), "DAM_SRM", None, DETERMINISTIC)
    assert net.objective == pytest.approx(plain.objective, rel=1e-9)


def test_binding_line_reduces_trade():
    cfg = fixture("two_bus")
    net, _ = run_session(cfg, "DAM_SRM", None, DETERMINISTIC)
    d = case_to_dict(cfg)
    d.pop("network")
    plain, _ = run_session(case_from_dict(d), "DAM_SRM", None, DETERMINISTIC)
    assert net.p_trade.sum() < plain.p_trade.sum() - 1.0
    assert net.objective < plain.objective


def test_line_below_must_run_transfer_is_infeasible():
    from rvppbid.sequence import SessionSolveError
    d = one_unit(2, [30, 30], [0, 0], 0)
    d["fleet"]["ndres"][0]["p_min"] = 25
    d["network"] = {"buses": [{"id": "m", "main": True}, {"id": "x"}],
                    "lines": [{"id": "L", "from": "x", "to": "m", "reactance": 0.1, "capacity": 20}],
                    "reference_bus": "m", "unit_bus": {"r": "x"}}
    with pytest.raises(SessionSolveError):
        run_session(case_from_dict(d), "DAM_SRM", None, DETERMINISTIC)


def test_unmapped_unit_rejected(case):
    d = case_to_dict(fixture("two_bus"))
    del d["network"]["unit_bus"]["wind"]
    with pytest.raises(ValueError):
        build_session_model(case_from_dict(d), "DAM_SRM")


def test_every_solve_verifies(dam_prop, dam_det):
    for _, bundle in (dam_prop, dam_det):
        sol = solve_reference(bundle.model)
        assert verify_solution(bundle.model, sol).ok
