"""Independent oracles and small-case builders shared by the tests."""
from __future__ import annotations

import itertools
from importlib import resources

import numpy as np

from rvppbid.domain import case_from_dict, load_case

DATA = resources.files("rvppbid") / "data"


def fixture_path(name: str) -> str:
    return str(DATA / f"{name}.json")


def fixture(name: str):
    return load_case(fixture_path(name))


def brute_price_reduction(x, pos, neg, gamma, dt=1.0) -> float:
    """max sum_t loss_t z_t over z in {0, frac, 1}^T with sum z <= gamma.

    Per-unit loss is the downward deviation when selling and the upward one
    when buying. Restricting z to that grid is exact for the budget polytope
    (one fractional coordinate suffices at a vertex).
    """
    x = np.asarray(x, dtype=float)
    loss = np.where(x >= 0, np.asarray(neg) * x, -np.asarray(pos) * x) * dt
    frac = gamma - np.floor(gamma)
    levels = sorted({0.0, 1.0, float(frac)})
    best = 0.0
    for z in itertools.product(levels, repeat=x.size):
        if sum(z) <= gamma + 1e-12:
            best = max(best, float(np.dot(loss, z)))
    return best


def series(a):
    return [float(v) for v in a]


def small_case(rng: np.random.Generator, T: int, units=("wind",), kappa=0.0, gamma_unit=0,
               gamma_price=0.0, demand=False, stu=False) -> dict:
    """Random instance with strictly positive deviations everywhere."""
    ndres = []
    for uid in units:
        med = rng.uniform(2.0, 20.0, T)
        neg = rng.uniform(0.1, 1.0, T) * med
        pos = rng.uniform(0.0, 5.0, T)
        ndres.append({"id": uid, "p_max": 25.0, "op_cost": float(rng.uniform(0, 10)),
                      "sr_ramp_up": 1.0, "sr_ramp_down": 1.0,
                      "forecast": {"median": series(med), "pos_dev": series(pos), "neg_dev": series(neg)}})
    fleet = {"ndres": ndres}
    if stu:
        sf = rng.uniform(5.0, 40.0, T)
        fleet["stu"] = [{"id": "stu", "p_max": 10.0, "op_cost": 3.0, "storage_capacity": 60.0,
                         "initial_storage": 5.0, "pb_efficiency": 0.4, "sr_ramp_up": 0.5, "sr_ramp_down": 0.5,
                         "solar_field_forecast": {"median": series(sf), "pos_dev": series(0.1 * sf),
                                                  "neg_dev": series(rng.uniform(0.1, 0.9, T) * sf)}}]
    if demand:
        profs = []
        for cost in (0.0, float(rng.uniform(0, 50))):
            m = rng.uniform(2.0, 6.0, T)
            profs.append({"cost": cost, "median": series(m), "pos_dev": series(rng.uniform(0.1, 1.0, T))})
        fleet["demand"] = [{"id": "load", "p_min": 0.0, "p_max": 10.0, "ramp_up": 10.0, "ramp_down": 10.0,
                            "sr_ramp_up": 0.1, "sr_ramp_down": 0.1, "flex_up": 0.1, "flex_down": 0.1,
                            "min_daily_energy": 0.0, "profiles": profs}]
    da = rng.uniform(20.0, 80.0, T)
    prices = {"da": {"median": series(da), "pos_dev": series(rng.uniform(1, 10, T)),
                     "neg_dev": series(rng.uniform(1, 10, T))},
              "sr_up": {"median": series(rng.uniform(5, 15, T)), "pos_dev": [1.0] * T, "neg_dev": [2.0] * T},
              "sr_down": {"median": series(rng.uniform(5, 15, T)), "pos_dev": [1.0] * T, "neg_dev": [2.0] * T}}
    unit_ids = [u["id"] for u in ndres] + (["stu"] if stu else []) + (["load"] if demand else [])
    return {"name": "small", "periods": T, "delta_t": 1.0, "fleet": fleet,
            "sessions": [{"kind": "DAM_SRM", "kappa": kappa, "rho": 0.5, "prices": prices}],
            "budgets": {"DAM_SRM": {"da": gamma_price, "sr_up": gamma_price, "sr_down": gamma_price,
                                    "units": {u: gamma_unit for u in unit_ids}}}}


def small_cfg(*args, **kw):
    return case_from_dict(small_case(*args, **kw))
