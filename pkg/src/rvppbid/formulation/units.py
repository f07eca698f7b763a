"""Unit blocks: non-dispatchable renewables, flexible demands, solar thermal.

Every block works on the session window. In later sessions the unit's
total power is the fixed cumulative schedule from earlier sessions plus a
fresh increment variable; the robust caps apply to the total.
"""
from __future__ import annotations

import math

import numpy as np

from ..domain import DAM_SRM, ForecastBand, FlexDemandUnit, MarketSessionSpec, NdResUnit, StuUnit
from ..milp.model import BINARY, DEMAND_ADD, PRODUCTION_CUT, LinExpr
from .bundle import (
    BASELINE23, DETERMINISTIC, PROPOSED, SessionModelBundle, StarredResults, UnitHandles,
    trade_label,
)
from .robust import add_robust_group


def _power_var_name(bundle: SessionModelBundle, uid: str, t: int) -> str:
    return f"p_{trade_label(bundle.key)}[{uid},{t + 1}]"


def _uncertain_cap(bundle: SessionModelBundle, name: str, uid: str, band: ForecastBand, budget: int,
                   per_period: np.ndarray | None, big_m, eps) -> dict[int, LinExpr]:
    """Worst-case available power ``median - y`` per window period."""
    W = list(bundle.window)
    if bundle.mode == DETERMINISTIC:
        return {t: LinExpr(const=band.median[t]) for t in W}
    if bundle.mode == BASELINE23:
        g = per_period if per_period is not None else np.full(band.T, budget / max(len(W), 1))
        return {t: LinExpr(const=band.median[t] - g[t] * band.neg_dev[t]) for t in W}
    dev = band.neg_dev
    y = add_robust_group(bundle.model, name, W, budget, PRODUCTION_CUT,
                         {t: LinExpr(const=dev[t]) for t in W}, deviations=dev[W],
                         big_m=big_m, eps=eps)
    bundle.role(f"y[{uid}]").update(y)
    return {t: band.median[t] - y[t] for t in W}


def build_ndres_block(bundle: SessionModelBundle, unit: NdResUnit, band: ForecastBand, budget: int,
                      spec: MarketSessionSpec, starred: StarredResults | None = None,
                      per_period: np.ndarray | None = None, big_m=None, eps=None) -> SessionModelBundle:
    m = bundle.model
    dt = spec.grid.delta_t
    W = list(bundle.window)
    fixed = starred.unit_fixed(unit.id) if (starred is not None and bundle.kind != DAM_SRM) \
        else np.zeros(spec.grid.period_count)
    h = UnitHandles("ndres")
    cap = _uncertain_cap(bundle, f"res_{unit.id}", unit.id, band, budget, per_period, big_m, eps)
    up_max = spec.sr_action_time * unit.sr_ramp_up
    dn_max = spec.sr_action_time * unit.sr_ramp_down
    for t in W:
        tag = f"{unit.id},{t + 1}"
        p = m.add_var(_power_var_name(bundle, unit.id, t), -fixed[t], unit.p_max - fixed[t])
        rup = m.add_var(f"rup[{tag}]", 0.0, up_max)  # T^SR ramp caps
        rdn = m.add_var(f"rdn[{tag}]", 0.0, dn_max)
        bundle.role(f"p[{unit.id}]")[t] = p
        bundle.role(f"rup[{unit.id}]")[t] = rup
        bundle.role(f"rdn[{unit.id}]")[t] = rdn
        total = p + fixed[t]
        m.add_constr(total - rdn >= unit.p_min, f"res_min[{tag}]")
        if band.median[t] > unit.p_max:  # otherwise implied by the forecast cap
            m.add_constr(total + rup <= unit.p_max, f"res_max[{tag}]")
        m.add_constr(total + rup <= cap[t], f"res_cap[{tag}]")
        h.power[t], h.r_up[t], h.r_dn[t] = total, LinExpr.of(rup), LinExpr.of(rdn)
        if unit.op_cost:
            bundle.add_term("op_cost", -unit.op_cost * dt * p)
    bundle.units[unit.id] = h
    return bundle


def build_stu_block(bundle: SessionModelBundle, unit: StuUnit, band: ForecastBand, budget: int,
                    spec: MarketSessionSpec, starred: StarredResults | None = None,
                    per_period: np.ndarray | None = None, big_m=None, eps=None) -> SessionModelBundle:
    """Solar field (robust), storage balance and power block of one STU."""
    m = bundle.model
    dt = spec.grid.delta_t
    W = list(bundle.window)
    later = starred is not None and bundle.kind != DAM_SRM
    fixed = starred.unit_fixed(unit.id) if later else np.zeros(spec.grid.period_count)
    if W and W[0] > 0:
        if starred is None or unit.id not in starred.storage:
            raise ValueError(f"STU {unit.id}: storage level before period {W[0] + 1} is not known")
        e_prev = LinExpr(const=float(starred.storage[unit.id][W[0] - 1]))
    else:
        e_prev = LinExpr(const=unit.initial_storage)
    h = UnitHandles("stu")
    h.extra = {"psf": {}, "q": {}, "e": {}}
    cap = _uncertain_cap(bundle, f"sf_{unit.id}", unit.id, band, budget, per_period, big_m, eps)
    up_max = spec.sr_action_time * unit.sr_ramp_up
    dn_max = spec.sr_action_time * unit.sr_ramp_down
    for t in W:
        tag = f"{unit.id},{t + 1}"
        psf = m.add_var(f"psf[{tag}]", 0.0, math.inf)
        e = m.add_var(f"e[{tag}]", 0.0, unit.storage_capacity)
        p = m.add_var(_power_var_name(bundle, unit.id, t), -fixed[t], unit.p_max - fixed[t])
        rup = m.add_var(f"rup[{tag}]", 0.0, up_max)
        rdn = m.add_var(f"rdn[{tag}]", 0.0, dn_max)
        for role, var in (("psf", psf), ("e", e), ("p", p), ("rup", rup), ("rdn", rdn)):
            bundle.role(f"{role}[{unit.id}]")[t] = var
        total = p + fixed[t]
        # power block: thermal draw q = p / efficiency, substituted into the storage balance
        q = total / unit.pb_efficiency
        m.add_constr(psf <= cap[t], f"sf_cap[{tag}]")
        m.add_constr((e - e_prev - dt * psf + dt * q).eq(0.0), f"storage[{tag}]")
        m.add_constr(total + rup <= unit.p_max, f"stu_max[{tag}]")
        m.add_constr(total - rdn >= unit.p_min, f"stu_min[{tag}]")
        e_prev = LinExpr.of(e)
        h.power[t], h.r_up[t], h.r_dn[t] = total, LinExpr.of(rup), LinExpr.of(rdn)
        h.extra["psf"][t], h.extra["q"][t], h.extra["e"][t] = LinExpr.of(psf), q, LinExpr.of(e)
        if unit.op_cost:
            bundle.add_term("op_cost", -unit.op_cost * dt * p)
    bundle.units[unit.id] = h
    return bundle


def build_demand_block(bundle: SessionModelBundle, unit: FlexDemandUnit, budget: int,
                       spec: MarketSessionSpec, starred: StarredResults | None = None,
                       per_period: np.ndarray | None = None, big_m=None, eps=None) -> SessionModelBundle:
    """Profile selection (DAM) or re-dispatch around the selected profile."""
    m = bundle.model
    dt = spec.grid.delta_t
    T = spec.grid.period_count
    W = list(bundle.window)
    later = bundle.kind != DAM_SRM
    h = UnitHandles("demand")
    uid = unit.id
    name = f"dem_{uid}"

    if not later:
        u = [m.add_var(f"u[{uid},{j + 1}]", kind=BINARY) for j in range(len(unit.profiles))]
        m.add_constr(LinExpr({v.index: 1.0 for v in u}).eq(1.0), f"profile_one[{uid}]")
        m.choice_sets.append([v.index for v in u])
        bundle.selectors[uid] = u
        for j, v in enumerate(u):
            bundle.role(f"u[{uid}]")[j] = v
        cost = LinExpr({v.index: -pr.cost for v, pr in zip(u, unit.profiles) if pr.cost})
        bundle.add_term("profile_cost", cost)
        base = {t: LinExpr({v.index: pr.median[t] for v, pr in zip(u, unit.profiles)}) for t in W}
        devx = {t: LinExpr({v.index: pr.pos_dev[t] for v, pr in zip(u, unit.profiles)}) for t in W}
        fixed = np.zeros(T)
        dev_const = None
        profile_devs = {v.index: np.asarray(pr.pos_dev)[W] for v, pr in zip(u, unit.profiles)}
    else:
        if starred is None or uid not in starred.profiles:
            raise ValueError(f"demand {uid}: selected profile from the day-ahead session is missing")
        prof = unit.profiles[starred.profiles[uid]]
        base = {t: LinExpr(const=prof.median[t]) for t in W}
        devx = {t: LinExpr(const=prof.pos_dev[t]) for t in W}
        fixed = starred.unit_fixed(uid)
        dev_const = np.asarray(prof.pos_dev)[W]
        profile_devs = None

    if bundle.mode == PROPOSED:
        y = add_robust_group(m, name, W, budget, DEMAND_ADD, devx, deviations=dev_const,
                             profile_deviations=profile_devs, big_m=big_m, eps=eps)
        bundle.role(f"y[{uid}]").update(y)
        extra = {t: LinExpr.of(y[t]) for t in W}
    elif bundle.mode == BASELINE23:
        g = per_period if per_period is not None else np.full(T, budget / max(len(W), 1))
        extra = {t: devx[t] * g[t] for t in W}
    else:
        extra = {t: LinExpr() for t in W}

    up_max = spec.sr_action_time * unit.sr_ramp_down
    dn_max = spec.sr_action_time * unit.sr_ramp_up
    for t in W:
        tag = f"{uid},{t + 1}"
        c = m.add_var(_power_var_name(bundle, uid, t), unit.p_min - fixed[t], unit.p_max - fixed[t])
        rup = m.add_var(f"rup[{tag}]", 0.0, up_max)  # shedding load = up reserve
        rdn = m.add_var(f"rdn[{tag}]", 0.0, dn_max)
        bundle.role(f"p[{uid}]")[t] = c
        bundle.role(f"rup[{uid}]")[t] = rup
        bundle.role(f"rdn[{uid}]")[t] = rdn
        total = c + fixed[t]
        nominal = base[t] + extra[t]
        if not later:
            m.add_constr((total - nominal).eq(0.0), f"dem_profile[{tag}]")
        else:
            # re-dispatch within the flexibility band around the selected profile
            m.add_constr(total - nominal >= -unit.flex_up[t] * base[t], f"dem_flex_lo[{tag}]")
            m.add_constr(total - nominal <= unit.flex_down[t] * base[t], f"dem_flex_hi[{tag}]")
        m.add_constr(rup <= unit.flex_up[t] * base[t], f"dem_rup_flex[{tag}]")
        m.add_constr(rup <= total - unit.p_min, f"dem_rup_min[{tag}]")
        m.add_constr(rdn <= unit.flex_down[t] * base[t], f"dem_rdn_flex[{tag}]")
        m.add_constr(rdn <= unit.p_max - total, f"dem_rdn_max[{tag}]")
        h.power[t], h.r_up[t], h.r_dn[t] = total, LinExpr.of(rup), LinExpr.of(rdn)

    # ramps between consecutive periods, worst reserve-activation combination
    for i, t in enumerate(W):
        if i == 0:
            if t == 0 or starred is None:
                continue
            prev_c = LinExpr(const=float(fixed[t - 1]))
            prev_up = LinExpr(const=float(starred.unit_r_up.get(uid, np.zeros(T))[t - 1]))
            prev_dn = LinExpr(const=float(starred.unit_r_dn.get(uid, np.zeros(T))[t - 1]))
        else:
            prev_c, prev_up, prev_dn = h.power[t - 1], h.r_up[t - 1], h.r_dn[t - 1]
        tag = f"{uid},{t + 1}"
        if math.isfinite(unit.ramp_up):
            m.add_constr((h.power[t] + h.r_dn[t]) - (prev_c - prev_up) <= unit.ramp_up * dt, f"dem_ramp_up[{tag}]")
        if math.isfinite(unit.ramp_down):
            m.add_constr((prev_c + prev_dn) - (h.power[t] - h.r_up[t]) <= unit.ramp_down * dt,
                         f"dem_ramp_dn[{tag}]")

    if unit.min_daily_energy > 0 and W:
        before = 0.0
        if W[0] > 0 and starred is not None:
            rup_prev = starred.unit_r_up.get(uid, np.zeros(T))
            before = float(np.sum((fixed[:W[0]] - rup_prev[:W[0]]) * dt))
        energy = LinExpr()
        for t in W:
            energy += (h.power[t] - h.r_up[t]) * dt
        m.add_constr(energy >= unit.min_daily_energy - before, f"dem_energy[{uid}]")
    bundle.units[uid] = h
    return bundle
