"""Portfolio-level rows: three-state balance, trade limits, DC sub-network."""
from __future__ import annotations

import math

from ..domain import IDM_K, MarketSessionSpec, NetworkSpec
from ..milp.model import LinExpr
from .bundle import SessionModelBundle

STATES = ("0", "up", "dn")


def _unit_state_power(bundle: SessionModelBundle, uid: str, t: int, state: str) -> LinExpr:
    """Net injection of a unit in a reserve state (consumption counts negative)."""
    h = bundle.units[uid]
    if h.kind == "demand":
        if state == "up":
            return -(h.power[t] - h.r_up[t])
        if state == "dn":
            return -(h.power[t] + h.r_dn[t])
        return -h.power[t]
    if state == "up":
        return h.power[t] + h.r_up[t]
    if state == "dn":
        return h.power[t] - h.r_dn[t]
    return LinExpr.of(h.power[t])


def _trade_state(bundle: SessionModelBundle, t: int, state: str) -> LinExpr:
    trade = bundle.exprs["trade_total"][t]
    if state == "up":
        return trade + bundle.exprs["r_up"][t]
    if state == "dn":
        return trade - bundle.exprs["r_dn"][t]
    return LinExpr.of(trade)


def build_balance(bundle: SessionModelBundle) -> SessionModelBundle:
    """Supply = traded + consumed, with reserve not called, called up, called down."""
    m = bundle.model
    for t in bundle.window:
        for state in STATES:
            net = LinExpr()
            for uid in bundle.units:
                net += _unit_state_power(bundle, uid, t, state)
            row = m.add_constr((net - _trade_state(bundle, t, state)).eq(0.0), f"balance_{state}[{t + 1}]")
            bundle.balance_rows.append(row)
    return bundle


def build_trade_limits(bundle: SessionModelBundle, spec: MarketSessionSpec, gen_capacity: float,
                       demand_capacity: float) -> SessionModelBundle:
    m = bundle.model
    for t in bundle.window:
        trade = bundle.exprs["trade_total"][t]
        r_up = bundle.exprs["r_up"][t]
        r_dn = bundle.exprs["r_dn"][t]
        m.add_constr(trade + r_up <= gen_capacity, f"trade_max[{t + 1}]")
        m.add_constr(trade - r_dn >= -demand_capacity, f"trade_min[{t + 1}]")
        if spec.kind == IDM_K:
            continue  # reserves were cleared earlier
        m.add_constr((r_up - spec.rho[t] * r_dn).eq(0.0), f"reserve_ratio[{t + 1}]")
        m.add_constr(r_up <= spec.kappa * gen_capacity, f"reserve_share[{t + 1}]")
    return bundle


def build_network_extension(bundle: SessionModelBundle, net: NetworkSpec) -> SessionModelBundle:
    """Replace the single-bus balance by DC power flow over the sub-region.

    Traded power and reserve are exchanged only at main buses; with several
    main buses the exchange is split by free per-bus variables summing to
    the total. Rows are replicated for the three reserve states.
    """
    m = bundle.model
    missing = [uid for uid in bundle.units if uid not in net.unit_bus]
    if missing:
        raise ValueError(f"units not mapped to a bus: {missing}")
    drop = set(bundle.balance_rows)
    m.constraints = [c for i, c in enumerate(m.constraints) if i not in drop]
    bundle.balance_rows = []
    mains = net.main_buses
    for t in bundle.window:
        for state in STATES:
            tag = f"{state},{t + 1}"
            delta = {}
            for b in net.buses:
                if b.id == net.reference_bus:
                    delta[b.id] = m.add_var(f"delta[{b.id},{tag}]", 0.0, 0.0)
                else:
                    delta[b.id] = m.add_var(f"delta[{b.id},{tag}]", -math.pi, math.pi)
            flows = {}
            for ln in net.lines:
                f = m.add_var(f"flow[{ln.id},{tag}]", -ln.capacity, ln.capacity)
                m.add_constr((f - (delta[ln.from_bus] - delta[ln.to_bus]) / ln.reactance).eq(0.0),
                             f"dc_flow[{ln.id},{tag}]")
                flows[ln.id] = f
                bundle.role(f"flow_{state}[{ln.id}]")[t] = f
            exch = {}
            for b in mains:
                exch[b] = m.add_var(f"exchange[{b},{tag}]", -math.inf, math.inf)
            total = LinExpr({v.index: 1.0 for v in exch.values()})
            m.add_constr((total - _trade_state(bundle, t, state)).eq(0.0), f"exchange_split[{tag}]")
            for b in net.buses:
                inj = LinExpr()
                for uid in bundle.units:
                    if net.unit_bus[uid] == b.id:
                        inj += _unit_state_power(bundle, uid, t, state)
                if b.id in exch:
                    inj -= exch[b.id]
                for ln in net.lines:
                    if ln.from_bus == b.id:
                        inj -= flows[ln.id]
                    elif ln.to_bus == b.id:
                        inj += flows[ln.id]
                m.add_constr(inj.eq(0.0), f"bus_balance[{b.id},{tag}]")
    return bundle

