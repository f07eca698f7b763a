"""Assemble a full session model (objective, unit blocks, system rows)."""
from __future__ import annotations

import math

import numpy as np

from ..domain import DAM_SRM, IDM_K, BudgetSet, CaseConfig, ForecastBand
from ..milp.model import LinExpr, ModelIR
from .bundle import (
    BASELINE23, DETERMINISTIC, MODES, PROPOSED, SessionModelBundle, StarredResults,
    trade_label,
)
from .price import add_price_robust_terms
from .system import build_balance, build_network_extension, build_trade_limits
from .units import build_demand_block, build_ndres_block, build_stu_block

INCOME_TERM = {"da": "income_da", "sr_up": "income_sr_up", "sr_down": "income_sr_down", "id": "income_id"}


def mean_price_band(band: ForecastBand) -> ForecastBand:
    """Symmetric band around ``median + (pos - neg) / 2`` with half-width ``(pos + neg) / 2``."""
    half = 0.5 * (band.pos_dev + band.neg_dev)
    return ForecastBand(band.median + 0.5 * (band.pos_dev - band.neg_dev), half, half)


def _check_starred(kind: str, starred: StarredResults | None, cfg: CaseConfig) -> None:
    if kind == DAM_SRM:
        return
    if starred is None or starred.p_da is None:
        raise ValueError(f"{kind} needs the day-ahead results (starred p_da)")
    for d in cfg.demand:
        if d.id not in starred.profiles:
            raise ValueError(f"{kind}: selected profile of demand {d.id} missing from starred results")


def build_session_model(cfg: CaseConfig, key: str, starred: StarredResults | None = None,
                        mode: str = PROPOSED, budgets: BudgetSet | None = None,
                        network: bool = True) -> SessionModelBundle:
    """Build the robust bidding MILP of one market session.

    ``proposed`` uses median prices, asymmetric price protection and global
    unit budgets; ``deterministic`` drops every robust term; ``baseline23``
    uses mean prices, symmetric protection and even per-period energy cuts.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    spec = cfg.session(key)
    kind = spec.kind
    _check_starred(kind, starred, cfg)
    budgets = budgets if budgets is not None else cfg.budgets_for(key)
    grid = spec.grid
    T, dt = grid.period_count, grid.delta_t
    W = list(grid.window)
    model = ModelIR(name=f"{key.lower()}_{mode}")
    bundle = SessionModelBundle(model, kind, key, mode, grid, starred=starred)
    model.meta.update({"session": key, "mode": mode})

    # market decision variables and fixed prior trades
    p_fixed = starred.trade_fixed() if (starred is not None and kind != DAM_SRM) else np.zeros(T)
    trade_name = f"p_{trade_label(key)}"
    trade_total, r_up, r_dn = {}, {}, {}
    r_up_fixed, r_dn_fixed = starred.reserve_fixed() if starred is not None else (np.zeros(T), np.zeros(T))
    for t in W:
        p = model.add_var(f"{trade_name}[{t + 1}]", -math.inf, math.inf)
        bundle.role("p_trade")[t] = p
        trade_total[t] = p + p_fixed[t]
        if kind == IDM_K:
            r_up[t] = LinExpr(const=r_up_fixed[t])
            r_dn[t] = LinExpr(const=r_dn_fixed[t])
        else:
            ru = model.add_var(f"r_up[{t + 1}]")
            rd = model.add_var(f"r_dn[{t + 1}]")
            bundle.role("r_up")[t] = ru
            bundle.role("r_dn")[t] = rd
            r_up[t], r_dn[t] = LinExpr.of(ru), LinExpr.of(rd)
    bundle.exprs["trade_total"] = trade_total
    bundle.exprs["r_up"] = r_up
    bundle.exprs["r_dn"] = r_dn
    bundle.exprs["p_trade"] = {t: LinExpr.of(v) for t, v in bundle.role("p_trade").items()}

    # income at median (or mean) prices, minus robust reductions
    can_buy = cfg.demand_capacity > 0
    for stream in spec.streams:
        band = spec.prices[stream]
        if mode == BASELINE23:
            band = mean_price_band(band)
        signed = stream in ("da", "id")
        qty = bundle.exprs["p_trade"] if signed else (r_up if stream == "sr_up" else r_dn)
        scale = dt if signed else 1.0  # reserve is paid per MW of capacity
        income = LinExpr()
        for t in W:
            income += band.median[t] * scale * qty[t]
        bundle.add_term(INCOME_TERM[stream], income)
        if mode == DETERMINISTIC:
            continue
        terms = add_price_robust_terms(model, stream, {t: qty[t] for t in W}, band,
                                       budgets.price_budget(stream), signed, dt, can_buy=can_buy)
        bundle.add_term(f"robust_{stream}", -terms.reduction)
        bundle.role(f"v_{stream}")[0] = terms.v
        bundle.role(f"eta_{stream}").update(terms.eta)
        bundle.role(f"yprice_{stream}").update(terms.y)

    # units
    for u in cfg.ndres:
        build_ndres_block(bundle, u, u.forecast(key), budgets.unit_budget(u.id), spec, starred,
                          budgets.per_period.get(u.id), cfg.big_m, cfg.epsilon)
    for u in cfg.stu:
        build_stu_block(bundle, u, u.forecast(key), budgets.unit_budget(u.id), spec, starred,
                        budgets.per_period.get(u.id), cfg.big_m, cfg.epsilon)
    for d in cfg.demand:
        build_demand_block(bundle, d, budgets.unit_budget(d.id), spec, starred,
                           budgets.per_period.get(d.id), cfg.big_m, cfg.epsilon)

    build_balance(bundle)
    build_trade_limits(bundle, spec, cfg.gen_capacity, cfg.demand_capacity)
    if network and cfg.network is not None:
        build_network_extension(bundle, cfg.network)
    bundle.info["budgets"] = budgets
    return bundle


def build_baseline23_model(cfg: CaseConfig, key: str, starred: StarredResults | None = None,
                           budgets: BudgetSet | None = None) -> SessionModelBundle:
    return build_session_model(cfg, key, starred, BASELINE23, budgets)

