"""Regenerate the JSON fixtures shipped in ``rvppbid/data``.

The numbers are synthetic but shaped after a Spanish-market day: a
wind/solar/solar-thermal portfolio with one flexible industrial demand.
Run from the repo root: ``python3 tools/make_fixtures.py``.
"""
import json
import math
from pathlib import Path

T = 24
OUT = Path(__file__).resolve().parents[1] / "src" / "rvppbid" / "data"
HOURS = range(1, T + 1)


def r(x, nd=3):
    return [round(float(v), nd) for v in x]


def daylight(h):
    # 10 productive hours, 8..17
    return math.sin(math.pi * (h - 7.5) / 10.0) if 8 <= h <= 17 else 0.0


def wind_band(shift=0.0):
    med = [24 + 12 * math.cos(2 * math.pi * (h - 3) / 24) + 3 * math.sin(h) + shift for h in HOURS]
    # large deviation in the evening ramp, tiny but distinct elsewhere
    neg = [(0.35 * m + 0.05 * h) if 16 <= h <= 22 else 0.01 * h for h, m in zip(HOURS, med)]
    pos = [0.2 * m + 0.03 * h for h, m in zip(HOURS, med)]
    return {"median": r(med), "pos_dev": r(pos), "neg_dev": r(neg)}


def solar_band(scale=1.0):
    med = [48 * scale * daylight(h) for h in HOURS]
    neg = [0.3 * m + 0.02 * h if m > 0 else 0.0 for h, m in zip(HOURS, med)]
    pos = [min(50 - m, 0.15 * m + 0.01 * h) if m > 0 else 0.0 for h, m in zip(HOURS, med)]
    return {"median": r(med), "pos_dev": r(pos), "neg_dev": r(neg)}


def solar_field_band():
    med = [130 * daylight(h) for h in HOURS]
    neg = [0.25 * m + 0.03 * h if m > 0 else 0.0 for h, m in zip(HOURS, med)]
    pos = [0.1 * m + 0.02 * h if m > 0 else 0.0 for h, m in zip(HOURS, med)]
    return {"median": r(med), "pos_dev": r(pos), "neg_dev": r(neg)}


def profiles():
    shapes = [
        lambda h: 15 + 6 * math.sin(math.pi * (h - 6) / 12) if 6 <= h <= 18 else 13.0,
        lambda h: 16.0 + 0.5 * math.cos(h),
        lambda h: 19 - 5 * math.sin(math.pi * (h - 6) / 12) if 6 <= h <= 18 else 18.0,
    ]
    out = []
    for i, (f, cost) in enumerate(zip(shapes, (60.0, 0.0, 120.0))):
        med = [min(f(h), 30.0) for h in HOURS]
        total = sum(med)
        if total < 372:  # keep every profile above the 360 MWh floor with some slack
            med = [m * 372 / total for m in med]
        # evening peak uncertainty, small but distinct elsewhere
        pos = [0.08 * m + 0.01 * (h + i) if 17 <= h <= 21 else 0.002 * (h + i + 1) for h, m in zip(HOURS, med)]
        out.append({"cost": cost, "median": r(med), "pos_dev": r(pos)})
    return out


def da_price(shift=0.0):
    med = [55 + 25 * math.sin(math.pi * (h - 6) / 16) ** 2 + (15 if 19 <= h <= 22 else 0) + shift
           for h in HOURS]
    pos = [0.12 * m + 0.1 * h for h, m in zip(HOURS, med)]
    neg = [0.3 * m + 0.07 * h for h, m in zip(HOURS, med)]
    return {"median": r(med), "pos_dev": r(pos), "neg_dev": r(neg)}


def sr_price(level):
    med = [level + 4 * math.cos(2 * math.pi * h / 24) for h in HOURS]
    pos = [0.1 * m + 0.02 * h for h, m in zip(HOURS, med)]
    neg = [0.4 * m + 0.03 * h for h, m in zip(HOURS, med)]
    return {"median": r(med), "pos_dev": r(pos), "neg_dev": r(neg)}


def fleet(wind=None, solar=None):
    return {
        "ndres": [
            {"id": "wind", "p_min": 0, "p_max": 50, "op_cost": 10, "sr_ramp_up": 1.0, "sr_ramp_down": 1.0,
             "forecast": wind or {"DAM_SRM": wind_band(), "SRM_IDM1": wind_band(0.8), "IDM_4": wind_band(1.5)}},
            {"id": "solar", "p_min": 0, "p_max": 50, "op_cost": 5, "sr_ramp_up": 0.5, "sr_ramp_down": 0.5,
             "forecast": solar or {"DAM_SRM": solar_band(), "SRM_IDM1": solar_band(1.02),
                                   "IDM_4": solar_band(1.04)}},
        ],
        "stu": [
            {"id": "stu", "p_min": 0, "p_max": 50, "op_cost": 15, "storage_capacity": 1100,
             "initial_storage": 150, "pb_efficiency": 0.38, "sr_ramp_up": 0.8, "sr_ramp_down": 0.8,
             "solar_field_forecast": solar_field_band()},
        ],
        "demand": [
            {"id": "load", "p_min": 5, "p_max": 30, "ramp_up": 8, "ramp_down": 8, "sr_ramp_up": 0.3,
             "sr_ramp_down": 0.3, "flex_up": 0.1, "flex_down": 0.1, "min_daily_energy": 360,
             "profiles": profiles()},
        ],
    }


def sessions():
    return [
        {"kind": "DAM_SRM", "rho": 0.6, "kappa": 0.2, "sr_action_time": 15,
         "prices": {"da": da_price(), "sr_up": sr_price(18), "sr_down": sr_price(12)}},
        {"kind": "SRM_IDM1", "rho": 0.6, "kappa": 0.2, "sr_action_time": 15,
         "prices": {"sr_up": sr_price(17), "sr_down": sr_price(11), "id": da_price(2.0)}},
        {"kind": "IDM_K", "idm_index": 4, "start": 13,
         "prices": {"id": da_price(-1.0)}},
    ]


def budgets(g_price, g_unit):
    units = {"wind": g_unit, "solar": g_unit, "stu": g_unit, "load": g_unit}
    return {
        "DAM_SRM": {"da": g_price, "sr_up": g_price, "sr_down": g_price, "units": units},
        "SRM_IDM1": {"sr_up": g_price, "sr_down": g_price, "id": g_price, "units": units},
        "IDM_4": {"id": g_price, "units": units},
    }


def case_study():
    return {"name": "case_study", "periods": T, "delta_t": 1.0, "fleet": fleet(),
            "sessions": sessions(), "budgets": budgets(5, 5)}


def symmetric():
    """One wind farm with symmetric bands; used for the baseline comparison."""
    w = wind_band()
    w["pos_dev"] = w["neg_dev"]
    prices = {"da": da_price(), "sr_up": sr_price(18), "sr_down": sr_price(12)}
    for band in prices.values():
        band["pos_dev"] = band["neg_dev"]
    return {
        "name": "symmetric", "periods": T, "delta_t": 1.0,
        "fleet": {"ndres": [{"id": "wind", "p_max": 50, "op_cost": 10, "forecast": w}]},
        # no reserve market (kappa 0); sr prices only complete the session
        "sessions": [{"kind": "DAM_SRM", "kappa": 0.0, "prices": prices}],
        "budgets": {"DAM_SRM": {"da": 5, "units": {"wind": 5}}},
    }


def two_bus():
    """Generation on a remote bus behind a 20 MW line; trades settle at the main bus."""
    cfg = case_study()
    cfg["name"] = "two_bus"
    cfg["fleet"]["demand"] = []
    cfg["sessions"] = cfg["sessions"][:1]
    cfg["budgets"] = {"DAM_SRM": {"units": {}}}
    cfg["network"] = {
        "buses": [{"id": "main", "main": True}, {"id": "remote"}],
        "lines": [{"id": "L1", "from": "remote", "to": "main", "reactance": 0.1, "capacity": 20}],
        "reference_bus": "main",
        "unit_bus": {"wind": "remote", "solar": "remote", "stu": "main"},
    }
    return cfg


def minimal():
    return {
        "name": "minimal", "periods": 2, "delta_t": 1.0,
        "fleet": {"ndres": [{"id": "pv", "p_max": 10, "forecast": {
            "median": [8, 6], "pos_dev": [1, 1], "neg_dev": [2, 3]}}]},
        "sessions": [{"kind": "DAM_SRM", "kappa": 0.0,
                      "prices": {"da": {"median": [40, 50], "pos_dev": [5, 5], "neg_dev": [10, 10]},
                                 "sr_up": {"median": [10, 10], "pos_dev": [1, 1], "neg_dev": [2, 2]},
                                 "sr_down": {"median": [8, 8], "pos_dev": [1, 1], "neg_dev": [2, 2]}}}],
    }


if __name__ == "__main__":
    for name, fn in [("case_study", case_study), ("symmetric", symmetric), ("two_bus", two_bus),
                     ("minimal", minimal)]:
        (OUT / f"{name}.json").write_text(json.dumps(fn(), indent=1) + "\n")
        print("wrote", name)
