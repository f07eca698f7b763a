"""Out-of-sample assessment of fixed day-ahead bids.

For each scenario the cleared energy and reserve bids and the selected
demand profiles are fixed, and the portfolio is re-dispatched inside the
realized availability. Imbalance is bought off through slacks penalized
at ``Z`` per MWh:

* ``kp``/``km``: energy short of / in excess of the energy bid,
* ``su``/``sd``: reserve short in the called-up / called-down state,
  on top of the energy imbalance.

The structure (matrix) is shared by all scenarios; only bounds and row
limits change, so one template is built and refilled per scenario.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..domain import CaseConfig
from ..milp.simplex import STATUS_OPTIMAL, solve_lp
from ..sequence import SessionEntry
from .scenarios import ScenarioSet


class RecourseError(RuntimeError):
    """A recourse LP failed; cannot happen with unbounded slacks unless inputs are broken."""


@dataclass
class Histogram:
    edges: np.ndarray
    counts: np.ndarray

    def to_dict(self) -> dict:
        return {"edges": self.edges.tolist(), "counts": self.counts.tolist()}


def histogram(x, bins="fd") -> Histogram:
    """Freedman-Diaconis bins by default; a degenerate sample gets one unit-wide bin."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return Histogram(np.array([0.0, 1.0]), np.array([0]))
    if np.ptp(x) == 0.0:
        edges = np.array([x[0] - 0.5, x[0] + 0.5])
    else:
        edges = np.histogram_bin_edges(x, bins=bins)
    counts, edges = np.histogram(x, bins=edges)
    return Histogram(edges, counts)


def mean(x) -> float:
    # correctly rounded, hence independent of the scenario order
    x = list(np.asarray(x, dtype=float))
    return math.fsum(x) / len(x) if x else 0.0


@dataclass
class AssessmentReport:
    profit_av: float  # average operating profit
    penalty_av: float  # average penalization cost
    net: float  # profit_av - penalty_av
    profit: np.ndarray
    penalty: np.ndarray
    energy_penalty: np.ndarray
    reserve_penalty: np.ndarray
    shortfall_mwh: np.ndarray
    Z: float
    meta: dict = field(default_factory=dict)

    @property
    def net_per_scenario(self) -> np.ndarray:
        return self.profit - self.penalty

    def histograms(self, bins="fd") -> dict[str, Histogram]:
        return {"profit": histogram(self.profit, bins), "penalty": histogram(self.penalty, bins),
                "net": histogram(self.net_per_scenario, bins)}

    def to_dict(self, bins="fd") -> dict:
        return {
            "profit_av": self.profit_av, "penalty_av": self.penalty_av, "net": self.net, "Z": self.Z,
            "energy_penalty_av": mean(self.energy_penalty), "reserve_penalty_av": mean(self.reserve_penalty),
            "n": int(self.profit.size), "meta": self.meta,
            "histograms": {k: h.to_dict() for k, h in self.histograms(bins).items()},
        }

    def rows(self) -> list[tuple[int, float, float, float]]:
        return [(w + 1, float(p), float(k), float(p - k)) for w, (p, k) in enumerate(zip(self.profit, self.penalty))]


class _Layout:
    """Column/row bookkeeping for the recourse template."""

    def __init__(self):
        self.lo: list[float] = []
        self.hi: list[float] = []
        self.cost: list[float] = []
        self.rows: list[dict[int, float]] = []
        self.rlo: list[float] = []
        self.rhi: list[float] = []

    def col(self, lo=0.0, hi=math.inf, cost=0.0) -> int:
        self.lo.append(lo)
        self.hi.append(hi)
        self.cost.append(cost)
        return len(self.lo) - 1

    def row(self, coeffs: dict[int, float], lo=-math.inf, hi=math.inf) -> int:
        self.rows.append(coeffs)
        self.rlo.append(lo)
        self.rhi.append(hi)
        return len(self.rows) - 1

    def matrix(self) -> sp.csc_matrix:
        data, ri, ci = [], [], []
        for i, r in enumerate(self.rows):
            for j, a in r.items():
                data.append(a)
                ri.append(i)
                ci.append(j)
        return sp.csc_matrix((data, (ri, ci)), shape=(len(self.rows), len(self.lo)))


def _add(d: dict[int, float], j: int, a: float) -> None:
    d[j] = d.get(j, 0.0) + a


class RecourseTemplate:
    """The per-scenario LP with scenario-dependent limits left open."""

    def __init__(self, cfg: CaseConfig, bids: SessionEntry, Z: float, key: str = "DAM_SRM"):
        spec = cfg.session(key)
        T, dt = cfg.period_count, cfg.delta_t
        self.cfg, self.bids, self.Z, self.key, self.T, self.dt = cfg, bids, Z, key, T, dt
        L = _Layout()
        p_star = np.asarray(bids.p_trade, dtype=float)
        ru_star = np.asarray(bids.r_up, dtype=float)
        rd_star = np.asarray(bids.r_dn, dtype=float)
        tsr = spec.sr_action_time
        self.avail_rows: dict[str, list[int]] = {}
        self.sf_cols: dict[str, list[int]] = {}
        self.dem_up: dict[str, list[int]] = {}
        self.dem_dn: dict[str, list[int]] = {}
        self.ramp_rows: dict[str, list[tuple[int, int, int]]] = {}
        self.energy_row: dict[str, int] = {}
        self.cost_cols: list[tuple[int, float]] = []
        slack = {}
        for name in ("kp", "km", "su", "sd"):
            slack[name] = [L.col(0.0, math.inf, Z * dt) for _ in range(T)]
        self.slack = slack
        # per-state net injection per period: coeffs over columns
        state = {s: [dict() for _ in range(T)] for s in ("0", "up", "dn")}

        for u in cfg.ndres:
            rows = []
            for t in range(T):
                p = L.col(0.0, u.p_max, u.op_cost * dt)
                ru = L.col(0.0, tsr * u.sr_ramp_up)
                rd = L.col(0.0, tsr * u.sr_ramp_down)
                self.cost_cols.append((p, u.op_cost * dt))
                L.row({p: 1.0, rd: -1.0}, lo=u.p_min)
                rows.append(L.row({p: 1.0, ru: 1.0}, hi=math.inf))  # <= realized availability
                for s, extra in (("0", {}), ("up", {ru: 1.0}), ("dn", {rd: -1.0})):
                    _add(state[s][t], p, 1.0)
                    for j, a in extra.items():
                        _add(state[s][t], j, a)
            self.avail_rows[u.id] = rows
        for u in cfg.stu:
            cols = []
            e_prev = None
            for t in range(T):
                psf = L.col(0.0, math.inf)  # <= realized solar-field output
                e = L.col(0.0, u.storage_capacity)
                p = L.col(0.0, u.p_max, u.op_cost * dt)
                ru = L.col(0.0, tsr * u.sr_ramp_up)
                rd = L.col(0.0, tsr * u.sr_ramp_down)
                self.cost_cols.append((p, u.op_cost * dt))
                coeffs = {e: 1.0, psf: -dt, p: dt / u.pb_efficiency}
                if e_prev is None:
                    L.row(coeffs, lo=u.initial_storage, hi=u.initial_storage)
                else:
                    coeffs[e_prev] = -1.0
                    L.row(coeffs, lo=0.0, hi=0.0)
                L.row({p: 1.0, ru: 1.0}, hi=u.p_max)
                L.row({p: 1.0, rd: -1.0}, lo=u.p_min)
                e_prev = e
                cols.append(psf)
                for s, extra in (("0", {}), ("up", {ru: 1.0}), ("dn", {rd: -1.0})):
                    _add(state[s][t], p, 1.0)
                    for j, a in extra.items():
                        _add(state[s][t], j, a)
            self.sf_cols[u.id] = cols
        for d in cfg.demand:
            ups, dns = [], []
            for t in range(T):
                ru = L.col(0.0, math.inf)  # scenario-dependent caps
                rd = L.col(0.0, math.inf)
                ups.append(ru)
                dns.append(rd)
                # consumption itself is a scenario constant moved to the row limits
                _add(state["up"][t], ru, 1.0)
                _add(state["dn"][t], rd, -1.0)
            ramps = []
            for t in range(1, T):
                r1 = L.row({dns[t]: 1.0, ups[t - 1]: 1.0}) if math.isfinite(d.ramp_up) else -1
                r2 = L.row({dns[t - 1]: 1.0, ups[t]: 1.0}) if math.isfinite(d.ramp_down) else -1
                ramps.append((t, r1, r2))
            self.ramp_rows[d.id] = ramps
            if d.min_daily_energy > 0:
                self.energy_row[d.id] = L.row({ru: -dt for ru in ups})
            self.dem_up[d.id], self.dem_dn[d.id] = ups, dns

        # balance in the three reserve states
        self.balance_rows = {s: [] for s in state}
        for t in range(T):
            for s, rhs in (("0", p_star[t]), ("up", p_star[t] + ru_star[t]), ("dn", p_star[t] - rd_star[t])):
                coeffs = dict(state[s][t])
                _add(coeffs, slack["kp"][t], 1.0)
                _add(coeffs, slack["km"][t], -1.0)
                if s == "up":
                    _add(coeffs, slack["su"][t], 1.0)
                elif s == "dn":
                    _add(coeffs, slack["sd"][t], -1.0)
                self.balance_rows[s].append(L.row(coeffs, rhs, rhs))
        self.base_rhs = {s: np.array([L.rlo[i] for i in rows]) for s, rows in self.balance_rows.items()}
        self.A = L.matrix()
        self.c = np.array(L.cost)
        self.lo0 = np.array(L.lo)
        self.hi0 = np.array(L.hi)
        self.rlo0 = np.array(L.rlo)
        self.rhi0 = np.array(L.rhi)
        self.spec = spec

    def limits(self, scen: ScenarioSet, w: int):
        """Bounds and row limits of scenario ``w``."""
        cfg, T, dt = self.cfg, self.T, self.dt
        lo, hi = self.lo0.copy(), self.hi0.copy()
        rlo, rhi = self.rlo0.copy(), self.rhi0.copy()
        for u in cfg.ndres:
            avail = scen.get(f"ndres:{u.id}", w)
            rhi[self.avail_rows[u.id]] = avail
        for u in cfg.stu:
            hi[self.sf_cols[u.id]] = scen.get(f"stu:{u.id}", w)
        demand_total = np.zeros(T)
        tsr = self.spec.sr_action_time
        for d in cfg.demand:
            j = self.bids.profiles[d.id]
            pr = d.profiles[j]
            c = scen.get(f"demand:{d.id}:{j}", w)
            demand_total += c
            # reserve caps from the selected profile's deviation, as in the out-of-sample model;
            # limits that the realized load alone would break are relaxed to force zero reserve
            hi[self.dem_up[d.id]] = np.maximum(0.0, np.minimum.reduce(
                [d.flex_up * pr.pos_dev, c - d.p_min, np.full(T, tsr * d.sr_ramp_down)]))
            hi[self.dem_dn[d.id]] = np.maximum(0.0, np.minimum.reduce(
                [d.flex_down * pr.pos_dev, d.p_max - c, np.full(T, tsr * d.sr_ramp_up)]))
            for t, r1, r2 in self.ramp_rows[d.id]:
                if r1 >= 0:
                    rhi[r1] = max(0.0, d.ramp_up * dt - (c[t] - c[t - 1]))
                if r2 >= 0:
                    rhi[r2] = max(0.0, d.ramp_down * dt - (c[t - 1] - c[t]))
            if d.id in self.energy_row:
                rlo[self.energy_row[d.id]] = min(0.0, d.min_daily_energy - float(np.sum(c)) * dt)
        for s, rows in self.balance_rows.items():
            rhs = self.base_rhs[s] + demand_total
            rlo[rows] = rhs
            rhi[rows] = rhs
        return lo, hi, rlo, rhi, demand_total

    def income(self, scen: ScenarioSet, w: int) -> float:
        b, dt = self.bids, self.dt
        total = 0.0
        streams = self.spec.streams
        if "da" in streams:
            total += float(np.dot(scen.get("price:da", w), b.p_trade)) * dt
        if "sr_up" in streams:
            total += float(np.dot(scen.get("price:sr_up", w), b.r_up))
        if "sr_down" in streams:
            total += float(np.dot(scen.get("price:sr_down", w), b.r_dn))
        return total

    def profile_cost(self) -> float:
        return sum(d.profiles[self.bids.profiles[d.id]].cost for d in self.cfg.demand)


def _solve(template: RecourseTemplate, lo, hi, rlo, rhi, engine: str) -> np.ndarray:
    if engine == "simplex":
        res = solve_lp(template.c, template.A, rlo, rhi, lo, hi)
        if res.status != STATUS_OPTIMAL:
            raise RecourseError(f"recourse LP status {res.status_name}")
        return res.x
    from scipy.optimize import linprog

    A = template.A.tocsr()
    eq = rlo == rhi
    ub = ~eq & np.isfinite(rhi)
    lb = ~eq & np.isfinite(rlo)
    res = linprog(template.c, A_ub=sp.vstack([A[ub], -A[lb]]), b_ub=np.concatenate([rhi[ub], -rlo[lb]]),
                  A_eq=A[eq], b_eq=rlo[eq], bounds=np.column_stack([lo, hi]), method="highs")
    if res.status != 0:
        raise RecourseError(f"recourse LP failed: {res.message}")
    return res.x


def out_of_sample_evaluate(cfg: CaseConfig, bids: SessionEntry, scenarios: ScenarioSet, Z: float = 1000.0,
                           engine: str = "simplex", key: str = "DAM_SRM") -> AssessmentReport:
    """Average profit, penalty and net of fixed bids over a scenario set."""
    if Z <= 0:
        raise ValueError("penalty Z must be positive")
    if bids.kind != "DAM_SRM":
        raise ValueError("out-of-sample assessment takes the day-ahead (DAM_SRM) bids")
    tpl = RecourseTemplate(cfg, bids, Z, key)
    n, dt = scenarios.n, cfg.delta_t
    profit = np.zeros(n)
    e_pen = np.zeros(n)
    r_pen = np.zeros(n)
    short = np.zeros(n)
    pc = tpl.profile_cost()
    energy_cols = np.array(tpl.slack["kp"] + tpl.slack["km"])
    reserve_cols = np.array(tpl.slack["su"] + tpl.slack["sd"])
    cost_idx = np.array([j for j, _ in tpl.cost_cols], dtype=int)
    cost_val = np.array([c for _, c in tpl.cost_cols])
    for w in range(n):
        lo, hi, rlo, rhi, _ = tpl.limits(scenarios, w)
        x = _solve(tpl, lo, hi, rlo, rhi, engine)
        op = float(cost_val @ x[cost_idx]) if cost_idx.size else 0.0
        profit[w] = tpl.income(scenarios, w) - op - pc
        e_pen[w] = Z * dt * float(np.sum(x[energy_cols]))
        r_pen[w] = Z * dt * float(np.sum(x[reserve_cols]))
        short[w] = dt * float(np.sum(x[tpl.slack["kp"]]))
    penalty = e_pen + r_pen
    p_av, k_av = mean(profit), mean(penalty)
    return AssessmentReport(p_av, k_av, p_av - k_av, profit, penalty, e_pen, r_pen, short, Z,
                            meta={"n": n, "generator": scenarios.generator, "seed": scenarios.seed,
                                  "engine": engine, "mode": bids.mode, **scenarios.params})
