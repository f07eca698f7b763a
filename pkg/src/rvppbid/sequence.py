"""Sequential market pipeline: DAM+SRM, then SRM+IDM#1, then each IDM#k.

Each session is solved on its own window; the accepted results become
fixed ("starred") parameters for every later session.
"""
from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .domain import (
    DAM_SRM, SRM_IDM1, BudgetSet, CaseConfig, MissingForecastError,
)
from .formulation import PROPOSED, SessionModelBundle, StarredResults, build_session_model
from .milp import Solution, verify_solution
from .milp.backends import solve_model


class SessionSolveError(RuntimeError):
    """A session model did not solve to optimality."""

    def __init__(self, key: str, status: str, diagnosis: dict[str, int]):
        fams = ", ".join(f"{k} x{v}" for k, v in sorted(diagnosis.items())) or "none"
        super().__init__(f"session {key}: solver status {status}; violated structures: {fams}")
        self.key = key
        self.status = status
        self.diagnosis = diagnosis


class SequenceError(ValueError):
    pass


def fmt(x: float) -> str:
    """Six significant digits, used everywhere numbers are written out."""
    x = float(x)
    if x == 0.0:
        return "0"
    return f"{x:.6g}"


@dataclass
class SessionEntry:
    """Cleared decisions of one session. Series are full-horizon, zero outside the window."""

    key: str
    kind: str
    mode: str
    start: int  # first period of the window, 1-based
    status: str
    objective: float
    decomposition: dict[str, float]
    p_trade: np.ndarray  # this session's own traded power
    trade_total: np.ndarray  # cumulative traded power including earlier sessions
    r_up: np.ndarray
    r_dn: np.ndarray
    unit_power: dict[str, np.ndarray]  # cumulative unit schedule
    unit_r_up: dict[str, np.ndarray]
    unit_r_dn: dict[str, np.ndarray]
    storage: dict[str, np.ndarray]
    profiles: dict[str, int]
    diagnostics: dict = field(default_factory=dict)

    @property
    def window(self) -> range:
        return range(self.start - 1, len(self.p_trade))

    def to_dict(self) -> dict:
        w = self.window

        def cut(a):
            return [_round(v) for v in np.asarray(a)[w.start:]]

        return {
            "key": self.key, "kind": self.kind, "mode": self.mode, "start": self.start,
            "status": self.status, "objective": _round(self.objective),
            "decomposition": {k: _round(v) for k, v in self.decomposition.items()},
            "t": [t + 1 for t in w],
            "p_trade": cut(self.p_trade), "trade_total": cut(self.trade_total),
            "r_up": cut(self.r_up), "r_down": cut(self.r_dn),
            "units": {uid: {"power": cut(self.unit_power[uid]), "r_up": cut(self.unit_r_up[uid]),
                            "r_down": cut(self.unit_r_dn[uid])} for uid in self.unit_power},
            "storage": {uid: cut(v) for uid, v in self.storage.items()},
            "profiles": {k: v + 1 for k, v in self.profiles.items()},
            # wall-clock times live in the run manifest so schedules stay reproducible
            "diagnostics": _jsonable({k: v for k, v in self.diagnostics.items() if k != "seconds"}),
        }

    def csv_rows(self) -> list[list[str]]:
        uids = list(self.unit_power)
        header = ["t", "p_trade", "r_up", "r_down"]
        for uid in uids:
            header += [uid, f"{uid}_r_up", f"{uid}_r_down"]
        rows = [header]
        for t in self.window:
            row = [str(t + 1), fmt(self.p_trade[t]), fmt(self.r_up[t]), fmt(self.r_dn[t])]
            for uid in uids:
                row += [fmt(self.unit_power[uid][t]), fmt(self.unit_r_up[uid][t]), fmt(self.unit_r_dn[uid][t])]
            rows.append(row)
        return rows


def _round(x) -> float:
    return float(fmt(x))


def _jsonable(obj):
    if isinstance(obj, float):
        return _round(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.floating):
        return _round(obj)
    if isinstance(obj, np.integer):
        return obj.item()
    return obj


@dataclass
class BidSchedule:
    case: str
    mode: str
    entries: list[SessionEntry] = field(default_factory=list)

    def entry(self, key: str) -> SessionEntry:
        for e in self.entries:
            if e.key == key:
                return e
        raise KeyError(key)

    @property
    def keys(self) -> list[str]:
        return [e.key for e in self.entries]

    def to_dict(self) -> dict:
        return {"case": self.case, "mode": self.mode, "sessions": [e.to_dict() for e in self.entries]}

    def write(self, out_dir: str | Path, stem: str = "schedule") -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = [out / f"{stem}.json"]
        paths[0].write_text(json.dumps(self.to_dict(), indent=1) + "\n")
        for e in self.entries:
            p = out / f"{e.key}.csv"
            with open(p, "w", newline="") as fh:
                csv.writer(fh).writerows(e.csv_rows())
            paths.append(p)
        return paths


def entry_from_dict(d: dict, T: int) -> SessionEntry:
    """Inverse of :meth:`SessionEntry.to_dict` (series re-expanded to T)."""
    start = int(d["start"])

    def full(vals):
        a = np.zeros(T)
        a[start - 1:] = vals
        return a

    return SessionEntry(
        key=d["key"], kind=d["kind"], mode=d["mode"], start=start, status=d["status"],
        objective=float(d["objective"]), decomposition=dict(d["decomposition"]),
        p_trade=full(d["p_trade"]), trade_total=full(d["trade_total"]), r_up=full(d["r_up"]),
        r_dn=full(d["r_down"]),
        unit_power={u: full(v["power"]) for u, v in d["units"].items()},
        unit_r_up={u: full(v["r_up"]) for u, v in d["units"].items()},
        unit_r_dn={u: full(v["r_down"]) for u, v in d["units"].items()},
        storage={u: full(v) for u, v in d.get("storage", {}).items()},
        profiles={k: int(v) - 1 for k, v in d["profiles"].items()},
        diagnostics=dict(d.get("diagnostics", {})))


def load_schedule(path: str | Path, T: int) -> BidSchedule:
    data = json.loads(Path(path).read_text())
    return BidSchedule(data["case"], data["mode"], [entry_from_dict(e, T) for e in data["sessions"]])


def _extract(bundle: SessionModelBundle, sol: Solution, cfg: CaseConfig) -> SessionEntry:
    T = cfg.period_count
    starred = bundle.starred
    prior = starred if starred is not None else StarredResults(T)
    units_power, units_up, units_dn, storage = {}, {}, {}, {}
    for uid, h in bundle.units.items():
        # cumulative schedule; outside the window keep what earlier sessions fixed
        base = prior.unit_fixed(uid) if bundle.kind != DAM_SRM else np.zeros(T)
        up = np.array(prior.unit_r_up.get(uid, np.zeros(T)), dtype=float)
        dn = np.array(prior.unit_r_dn.get(uid, np.zeros(T)), dtype=float)
        pw = base.copy()
        for t in bundle.window:
            pw[t] = sol.value(h.power[t])
            up[t] = sol.value(h.r_up[t])
            dn[t] = sol.value(h.r_dn[t])
        units_power[uid], units_up[uid], units_dn[uid] = pw, up, dn
        if "e" in h.extra:
            e = np.array(prior.storage.get(uid, np.zeros(T)), dtype=float)
            for t in bundle.window:
                e[t] = sol.value(h.extra["e"][t])
            storage[uid] = e
    profiles = {}
    if bundle.kind == DAM_SRM:
        for uid, sel in bundle.selectors.items():
            profiles[uid] = int(np.argmax([sol.value(v) for v in sel]))
    else:
        profiles = dict(prior.profiles)
    diag = {k: v for k, v in sol.info.items() if k in ("seconds", "combinations", "iterations_total",
                                                        "backend", "profile_choice")}
    diag["active_sets"] = dict(sol.active_sets)
    diag["rows"] = bundle.model.n_constraints
    diag["cols"] = bundle.model.n_vars
    return SessionEntry(
        key=bundle.key, kind=bundle.kind, mode=bundle.mode, start=bundle.grid.session_start,
        status=sol.status, objective=float(sol.objective), decomposition=bundle.decompose(sol),
        p_trade=bundle.series(sol, "p_trade"), trade_total=_full(bundle, sol, "trade_total", prior, T),
        r_up=_full(bundle, sol, "r_up", prior, T), r_dn=_full(bundle, sol, "r_dn", prior, T),
        unit_power=units_power, unit_r_up=units_up, unit_r_dn=units_dn, storage=storage,
        profiles=profiles, diagnostics=diag)


def _full(bundle, sol, name, prior: StarredResults, T: int) -> np.ndarray:
    if name == "trade_total":
        out = prior.trade_fixed() if bundle.kind != DAM_SRM else np.zeros(T)
    else:
        r_up, r_dn = prior.reserve_fixed()
        out = np.array(r_up if name == "r_up" else r_dn, dtype=float)
    out = np.array(out, dtype=float)
    for t, e in bundle.exprs[name].items():
        out[t] = sol.value(e)
    return out


def run_session(cfg: CaseConfig, key: str, starred: StarredResults | None = None, mode: str = PROPOSED,
                budgets: BudgetSet | None = None, backend: str | None = None,
                solve_options=None) -> tuple[SessionEntry, SessionModelBundle]:
    """Build and solve one session; raise :class:`SessionSolveError` unless optimal."""
    t0 = time.perf_counter()
    bundle = build_session_model(cfg, key, starred, mode, budgets)
    backend = backend or cfg.solver.get("backend")
    sol = solve_model(bundle.model, backend, solve_options)
    if not sol.ok:
        rep = verify_solution(bundle.model, sol, check_objective=False)
        raise SessionSolveError(key, sol.status, rep.structures())
    entry = _extract(bundle, sol, cfg)
    entry.diagnostics["seconds"] = time.perf_counter() - t0
    return entry, bundle


def _check_order(cfg: CaseConfig) -> None:
    if not cfg.sessions or cfg.sessions[0].kind != DAM_SRM:
        raise SequenceError("the chain must start with DAM_SRM")
    last = (-1, -1)
    for s in cfg.sessions:
        rank = {DAM_SRM: (0, 0), SRM_IDM1: (1, 1)}.get(s.kind, (2, s.idm_index or 0))
        if rank <= last:
            raise SequenceError(f"session {s.key} is out of order")
        last = rank
    for s in cfg.sessions:
        for stream in s.streams:
            if stream not in s.prices:
                raise MissingForecastError(f"session {s.key} has no {stream} price forecast")
        for u in (*cfg.ndres, *cfg.stu):
            u.forecast(s.key)  # raises MissingForecastError for a missing update


AcceptanceHook = Callable[[str, SessionEntry], "float | np.ndarray"]


def accept_all(key: str, entry: SessionEntry) -> float:
    return 1.0


def update_starred(starred: StarredResults, entry: SessionEntry, accepted: float | np.ndarray = 1.0,
                   idm_index: int | None = None) -> StarredResults:
    """Fix one cleared session's results; returns a new object, never mutates."""
    out = starred.copy()
    a = np.broadcast_to(np.asarray(accepted, dtype=float), entry.p_trade.shape)
    w = entry.window
    if entry.kind == DAM_SRM:
        out.p_da = a * entry.p_trade
        out.unit_da = {u: p.copy() for u, p in entry.unit_power.items()}
        out.profiles = dict(entry.profiles)
        out.r_up = a * entry.r_up
        out.r_dn = a * entry.r_dn
    else:
        k = 1 if entry.kind == SRM_IDM1 else int(idm_index)
        out.p_id[k] = a * entry.p_trade
        base = {u: starred.unit_fixed(u) for u in entry.unit_power}
        out.unit_id[k] = {u: np.where(np.arange(len(p)) >= w.start, p - base[u], 0.0)
                          for u, p in entry.unit_power.items()}
        if entry.kind == SRM_IDM1:
            out.r_up = a * entry.r_up
            out.r_dn = a * entry.r_dn
    out.unit_r_up = {u: v.copy() for u, v in entry.unit_r_up.items()}
    out.unit_r_dn = {u: v.copy() for u, v in entry.unit_r_dn.items()}
    out.storage = {u: v.copy() for u, v in entry.storage.items()}
    return out


def chain_sessions(cfg: CaseConfig, mode: str = PROPOSED, acceptance: AcceptanceHook | None = None,
                   backend: str | None = None, keys: list[str] | None = None,
                   solve_options=None) -> BidSchedule:
    """Solve the configured sessions in order, fixing each one's results downstream.

    ``acceptance(key, entry)`` returns the accepted fraction (scalar or per
    period) of the session's traded energy and reserve; default is 1.
    ``keys`` restricts the chain to a subset of the configured sessions.
    """
    _check_order(cfg)
    acceptance = acceptance or accept_all
    sched = BidSchedule(cfg.name, mode)
    starred = StarredResults(cfg.period_count)
    for spec in cfg.sessions:
        if keys is not None and spec.key not in keys:
            continue
        entry, _ = run_session(cfg, spec.key, starred if spec.kind != DAM_SRM else None, mode,
                               backend=backend, solve_options=solve_options)
        sched.entries.append(entry)
        starred = update_starred(starred, entry, acceptance(spec.key, entry), spec.idm_index)
        entry.diagnostics["starred"] = _starred_summary(starred)
    return sched


def _starred_summary(s: StarredResults) -> dict:
    return {"p_da": None if s.p_da is None else s.p_da.tolist(),
            "p_id": {k: v.tolist() for k, v in s.p_id.items()},
            "r_up": None if s.r_up is None else s.r_up.tolist(),
            "r_dn": None if s.r_dn is None else s.r_dn.tolist()}


__all__ = [
    "BidSchedule", "SequenceError", "SessionEntry", "SessionSolveError", "accept_all",
    "chain_sessions", "entry_from_dict", "fmt", "load_schedule", "run_session", "update_starred",
]
