"""Problem-instance data model, config loading and validation.

All time series are indexed 0..T-1 internally; config files and CSVs use
1-based period numbers. Session windows start at ``session_start`` (1-based).
"""
from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

DAM_SRM = "DAM_SRM"
SRM_IDM1 = "SRM_IDM1"
IDM_K = "IDM_K"
SESSION_KINDS = (DAM_SRM, SRM_IDM1, IDM_K)

# price streams traded in each session kind; "id" is the session's IDM price
SESSION_STREAMS = {
    DAM_SRM: ("da", "sr_up", "sr_down"),
    SRM_IDM1: ("sr_up", "sr_down", "id"),
    IDM_K: ("id",),
}
PRICE_STREAMS = ("da", "sr_up", "sr_down", "id")
DEFAULT_FORECAST = "*"


class ConfigError(ValueError):
    """Config could not be parsed; carries the field path and line if known."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        where = []
        if field:
            where.append(f"field {field}")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.field = field
        self.line = line


class LengthMismatchError(ConfigError):
    pass


class MissingForecastError(KeyError):
    pass


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------------------
# types
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class TimeGrid:
    period_count: int
    delta_t: float = 1.0
    session_start: int = 1

    @property
    def window(self) -> range:
        """0-based indices of the periods covered by the session."""
        return range(self.session_start - 1, self.period_count)

    @property
    def n_window(self) -> int:
        return self.period_count - self.session_start + 1


@dataclass(frozen=True)
class ForecastBand:
    median: np.ndarray
    pos_dev: np.ndarray
    neg_dev: np.ndarray

    def __post_init__(self):
        for name in ("median", "pos_dev", "neg_dev"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @classmethod
    def flat(cls, T: int, median: float = 0.0, pos: float = 0.0, neg: float = 0.0) -> "ForecastBand":
        return cls(np.full(T, median), np.full(T, pos), np.full(T, neg))

    @property
    def T(self) -> int:
        return int(self.median.size)

    @property
    def lower(self) -> np.ndarray:
        return self.median - self.neg_dev

    @property
    def upper(self) -> np.ndarray:
        return self.median + self.pos_dev

    def to_dict(self) -> dict:
        return {"median": self.median.tolist(), "pos_dev": self.pos_dev.tolist(),
                "neg_dev": self.neg_dev.tolist()}


def _forecast_lookup(forecasts: dict[str, ForecastBand], key: str, owner: str) -> ForecastBand:
    if key in forecasts:
        return forecasts[key]
    if DEFAULT_FORECAST in forecasts:
        return forecasts[DEFAULT_FORECAST]
    raise MissingForecastError(f"{owner}: no forecast for session {key}")


@dataclass(frozen=True)
class NdResUnit:
    id: str
    p_min: float
    p_max: float
    op_cost: float
    sr_ramp_up: float
    sr_ramp_down: float
    forecasts: dict[str, ForecastBand]
    bus: str | None = None

    def forecast(self, session_key: str) -> ForecastBand:
        return _forecast_lookup(self.forecasts, session_key, self.id)


@dataclass(frozen=True)
class StuUnit:
    id: str
    p_min: float
    p_max: float
    op_cost: float
    storage_capacity: float
    pb_efficiency: float
    sr_ramp_up: float
    sr_ramp_down: float
    solar_field_forecasts: dict[str, ForecastBand]
    initial_storage: float = 0.0
    bus: str | None = None

    def forecast(self, session_key: str) -> ForecastBand:
        return _forecast_lookup(self.solar_field_forecasts, session_key, self.id)


@dataclass(frozen=True)
class DemandProfile:
    cost: float
    median: np.ndarray
    pos_dev: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "median", _frozen(self.median))
        object.__setattr__(self, "pos_dev", _frozen(self.pos_dev))


@dataclass(frozen=True)
class FlexDemandUnit:
    id: str
    profiles: tuple[DemandProfile, ...]
    p_min: float
    p_max: float
    ramp_up: float
    ramp_down: float
    sr_ramp_up: float
    sr_ramp_down: float
    flex_up: np.ndarray  # beta lower: share of load that may be shed (up reserve)
    flex_down: np.ndarray  # beta upper: share of load that may be added (down reserve)
    min_daily_energy: float = 0.0
    bus: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "profiles", tuple(self.profiles))
        object.__setattr__(self, "flex_up", _frozen(self.flex_up))
        object.__setattr__(self, "flex_down", _frozen(self.flex_down))


@dataclass(frozen=True)
class MarketSessionSpec:
    kind: str
    grid: TimeGrid
    prices: dict[str, ForecastBand]
    rho: np.ndarray
    kappa: float = 1.0
    sr_action_time: float = 15.0
    idm_index: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "rho", _frozen(self.rho))

    @property
    def key(self) -> str:
        return session_key(self.kind, self.idm_index)

    @property
    def streams(self) -> tuple[str, ...]:
        return SESSION_STREAMS[self.kind]

    @property
    def has_reserve_market(self) -> bool:
        return self.kind in (DAM_SRM, SRM_IDM1)


def session_key(kind: str, idm_index: int | None = None) -> str:
    if kind == IDM_K:
        return f"IDM_{idm_index}"
    return kind


@dataclass(frozen=True)
class BudgetSet:
    price: dict[str, float] = field(default_factory=dict)
    unit: dict[str, int] = field(default_factory=dict)
    # per-period fractional budgets used by the baseline model
    per_period: dict[str, np.ndarray] = field(default_factory=dict)

    def price_budget(self, stream: str) -> float:
        return float(self.price.get(stream, 0.0))

    def unit_budget(self, unit_id: str) -> int:
        return int(self.unit.get(unit_id, 0))

    @property
    def gamma_da(self) -> float:
        return self.price_budget("da")

    @property
    def gamma_sr_up(self) -> float:
        return self.price_budget("sr_up")

    @property
    def gamma_sr_down(self) -> float:
        return self.price_budget("sr_down")

    @property
    def gamma_id(self) -> float:
        return self.price_budget("id")

    def with_all(self, value: float, prices: bool = True, units: bool = True,
                 unit_ids=(), streams=PRICE_STREAMS) -> "BudgetSet":
        price = dict(self.price)
        unit = dict(self.unit)
        if prices:
            price.update({s: float(value) for s in streams})
        if units:
            unit.update({u: int(value) for u in unit_ids})
        return BudgetSet(price, unit, dict(self.per_period))

    def to_dict(self) -> dict:
        out: dict[str, Any] = dict(self.price)
        if self.unit:
            out["units"] = dict(self.unit)
        if self.per_period:
            out["per_period"] = {k: v.tolist() for k, v in self.per_period.items()}
        return out


@dataclass(frozen=True)
class Bus:
    id: str
    main: bool = False


@dataclass(frozen=True)
class Line:
    id: str
    from_bus: str
    to_bus: str
    reactance: float
    capacity: float


@dataclass(frozen=True)
class NetworkSpec:
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    reference_bus: str
    unit_bus: dict[str, str]

    @property
    def main_buses(self) -> list[str]:
        return [b.id for b in self.buses if b.main]


@dataclass(frozen=True)
class CaseConfig:
    name: str
    period_count: int
    delta_t: float
    ndres: tuple[NdResUnit, ...]
    stu: tuple[StuUnit, ...]
    demand: tuple[FlexDemandUnit, ...]
    sessions: tuple[MarketSessionSpec, ...]
    budgets: dict[str, BudgetSet]
    network: NetworkSpec | None = None
    solver: dict = field(default_factory=dict)
    big_m: float | None = None
    epsilon: float | None = None

    def session(self, key: str) -> MarketSessionSpec:
        for s in self.sessions:
            if s.key == key:
                return s
        raise KeyError(f"no session {key} in case {self.name}")

    def budgets_for(self, key: str) -> BudgetSet:
        return self.budgets.get(key, BudgetSet())

    def with_budgets(self, key: str, budgets: BudgetSet) -> "CaseConfig":
        new = dict(self.budgets)
        new[key] = budgets
        return dataclasses.replace(self, budgets=new)

    @property
    def gen_capacity(self) -> float:
        return sum(u.p_max for u in self.ndres) + sum(u.p_max for u in self.stu)

    @property
    def demand_capacity(self) -> float:
        return sum(d.p_max for d in self.demand)

    @property
    def unit_ids(self) -> list[str]:
        return [u.id for u in (*self.ndres, *self.stu, *self.demand)]


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------
class _Reader:
    """Walks the parsed JSON keeping a field path for error messages."""

    def __init__(self, base_dir: Path, T: int):
        self.base_dir = base_dir
        self.T = T

    def get(self, obj: dict, key: str, path: str, default=..., kind=float):
        if key not in obj:
            if default is ...:
                raise ConfigError("missing required field", f"{path}.{key}")
            return default
        value = obj[key]
        if kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"expected a number, got {value!r}", f"{path}.{key}")
            return float(value)
        if kind is int:
            if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
                raise ConfigError(f"expected an integer, got {value!r}", f"{path}.{key}")
            return int(value)
        if kind is str and not isinstance(value, str):
            raise ConfigError(f"expected a string, got {value!r}", f"{path}.{key}")
        return value

    def series(self, value, path: str, allow_scalar: bool = False) -> np.ndarray:
        if allow_scalar and isinstance(value, (int, float)) and not isinstance(value, bool):
            return np.full(self.T, float(value))
        if not isinstance(value, list):
            raise ConfigError(f"expected a list of {self.T} numbers", path)
        if len(value) != self.T:
            raise LengthMismatchError(f"series {path} has length {len(value)}, expected T={self.T}", path)
        try:
            return np.array([float(v) for v in value])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"non-numeric entry in series: {exc}", path) from None

    def band(self, value, path: str) -> ForecastBand:
        if not isinstance(value, dict):
            raise ConfigError("expected a forecast band object", path)
        if "csv" in value:
            return self.band_csv(value["csv"], path)
        med = self.series(value.get("median"), f"{path}.median")
        pos = self.series(value.get("pos_dev", [0.0] * self.T), f"{path}.pos_dev", allow_scalar=True)
        neg = self.series(value.get("neg_dev", [0.0] * self.T), f"{path}.neg_dev", allow_scalar=True)
        return ForecastBand(med, pos, neg)

    def band_csv(self, ref: str, path: str) -> ForecastBand:
        file = (self.base_dir / ref).resolve()
        if not file.exists():
            raise ConfigError(f"CSV file {ref} not found", f"{path}.csv")
        rows: dict[str, list[float]] = {"median": [], "pos_dev": [], "neg_dev": []}
        with open(file, newline="") as fh:
            reader = csv.DictReader(fh)
            header = [h.strip() for h in (reader.fieldnames or [])]
            if header[:1] != ["t"] or not {"median", "pos_dev", "neg_dev"} <= set(header):
                raise ConfigError(f"{ref}: header must be t,median,pos_dev,neg_dev", f"{path}.csv", 1)
            for lineno, row in enumerate(reader, start=2):
                row = {k.strip(): v for k, v in row.items() if k is not None}
                try:
                    t = int(row["t"])
                    vals = {k: float(row[k]) for k in rows}
                except (TypeError, ValueError):
                    raise ConfigError(f"{ref}: malformed row", f"{path}.csv", lineno) from None
                if t != len(rows["median"]) + 1:
                    raise ConfigError(f"{ref}: expected t={len(rows['median']) + 1}, got {t}", f"{path}.csv", lineno)
                for k in rows:
                    rows[k].append(vals[k])
        n = len(rows["median"])
        if n != self.T:
            raise LengthMismatchError(f"series {path} ({ref}) has length {n}, expected T={self.T}", path)
        return ForecastBand(rows["median"], rows["pos_dev"], rows["neg_dev"])

    def forecasts(self, value, path: str) -> dict[str, ForecastBand]:
        if not isinstance(value, dict):
            raise ConfigError("expected a forecast band or a map session -> band", path)
        if "median" in value or "csv" in value:
            return {DEFAULT_FORECAST: self.band(value, path)}
        return {k: self.band(v, f"{path}.{k}") for k, v in value.items()}


def load_case(path: str | Path) -> CaseConfig:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file {path} does not exist")
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    return case_from_dict(data, path.parent)


def case_from_dict(data: dict, base_dir: str | Path = ".") -> CaseConfig:
    if not isinstance(data, dict):
        raise ConfigError("top level must be an object")
    probe = _Reader(Path(base_dir), 0)
    T = probe.get(data, "periods", "$", kind=int)
    if T < 1:
        raise ConfigError("periods must be >= 1", "$.periods")
    rd = _Reader(Path(base_dir), T)
    delta_t = rd.get(data, "delta_t", "$", 1.0)
    fleet = data.get("fleet", {})
    consts = data.get("constants", {})

    ndres = []
    for i, u in enumerate(fleet.get("ndres", [])):
        p = f"$.fleet.ndres[{i}]"
        ndres.append(NdResUnit(
            id=rd.get(u, "id", p, kind=str), p_min=rd.get(u, "p_min", p, 0.0), p_max=rd.get(u, "p_max", p),
            op_cost=rd.get(u, "op_cost", p, 0.0), sr_ramp_up=rd.get(u, "sr_ramp_up", p, 0.0),
            sr_ramp_down=rd.get(u, "sr_ramp_down", p, 0.0),
            forecasts=rd.forecasts(rd.get(u, "forecast", p, kind=dict), f"{p}.forecast"),
            bus=u.get("bus")))
    stu = []
    for i, u in enumerate(fleet.get("stu", [])):
        p = f"$.fleet.stu[{i}]"
        stu.append(StuUnit(
            id=rd.get(u, "id", p, kind=str), p_min=rd.get(u, "p_min", p, 0.0), p_max=rd.get(u, "p_max", p),
            op_cost=rd.get(u, "op_cost", p, 0.0), storage_capacity=rd.get(u, "storage_capacity", p),
            pb_efficiency=rd.get(u, "pb_efficiency", p), sr_ramp_up=rd.get(u, "sr_ramp_up", p, 0.0),
            sr_ramp_down=rd.get(u, "sr_ramp_down", p, 0.0),
            solar_field_forecasts=rd.forecasts(rd.get(u, "solar_field_forecast", p, kind=dict),
                                               f"{p}.solar_field_forecast"),
            initial_storage=rd.get(u, "initial_storage", p, 0.0), bus=u.get("bus")))
    demand = []
    for i, u in enumerate(fleet.get("demand", [])):
        p = f"$.fleet.demand[{i}]"
        profiles = []
        for j, pr in enumerate(rd.get(u, "profiles", p, kind=list)):
            pp = f"{p}.profiles[{j}]"
            if "csv" in pr:
                band = rd.band_csv(pr["csv"], pp)
                med, pos = band.median, band.pos_dev
            else:
                med = rd.series(pr.get("median"), f"{pp}.median")
                pos = rd.series(pr.get("pos_dev", 0.0), f"{pp}.pos_dev", allow_scalar=True)
            profiles.append(DemandProfile(rd.get(pr, "cost", pp, 0.0), med, pos))
        demand.append(FlexDemandUnit(
            id=rd.get(u, "id", p, kind=str), profiles=tuple(profiles), p_min=rd.get(u, "p_min", p, 0.0),
            p_max=rd.get(u, "p_max", p), ramp_up=rd.get(u, "ramp_up", p, math.inf),
            ramp_down=rd.get(u, "ramp_down", p, math.inf), sr_ramp_up=rd.get(u, "sr_ramp_up", p, 0.0),
            sr_ramp_down=rd.get(u, "sr_ramp_down", p, 0.0),
            flex_up=rd.series(u.get("flex_up", 0.0), f"{p}.flex_up", allow_scalar=True),
            flex_down=rd.series(u.get("flex_down", 0.0), f"{p}.flex_down", allow_scalar=True),
            min_daily_energy=rd.get(u, "min_daily_energy", p, 0.0), bus=u.get("bus")))

    sessions = []
    for i, s in enumerate(data.get("sessions", [{"kind": DAM_SRM}])):
        p = f"$.sessions[{i}]"
        kind = rd.get(s, "kind", p, kind=str)
        if kind not in SESSION_KINDS:
            raise ConfigError(f"unknown session kind {kind!r}; expected one of {SESSION_KINDS}", f"{p}.kind")
        idm = rd.get(s, "idm_index", p, None, kind=int) if kind == IDM_K else None
        if kind == IDM_K and idm is None:
            raise ConfigError("IDM_K session needs idm_index", p)
        start = rd.get(s, "start", p, 1, kind=int)
        prices = {k: rd.band(v, f"{p}.prices.{k}") for k, v in s.get("prices", {}).items()}
        for k in prices:
            if k not in PRICE_STREAMS:
                raise ConfigError(f"unknown price stream {k!r}", f"{p}.prices.{k}")
        sessions.append(MarketSessionSpec(
            kind=kind, grid=TimeGrid(T, delta_t, start), prices=prices,
            rho=rd.series(s.get("rho", 1.0), f"{p}.rho", allow_scalar=True),
            kappa=rd.get(s, "kappa", p, 1.0), sr_action_time=rd.get(s, "sr_action_time", p, 15.0),
            idm_index=idm))

    budgets = {}
    for key, b in data.get("budgets", {}).items():
        p = f"$.budgets.{key}"
        price = {k: rd.get(b, k, p) for k in PRICE_STREAMS if k in b}
        units = {}
        for uid, g in b.get("units", {}).items():
            if isinstance(g, bool) or not isinstance(g, (int, float)):
                raise ConfigError(f"expected a number, got {g!r}", f"{p}.units.{uid}")
            units[uid] = g
        per = {uid: rd.series(v, f"{p}.per_period.{uid}", allow_scalar=True)
               for uid, v in b.get("per_period", {}).items()}
        budgets[key] = BudgetSet(price, units, per)

    network = None
    if data.get("network"):
        n = data["network"]
        p = "$.network"
        buses = tuple(Bus(rd.get(b, "id", f"{p}.buses[{i}]", kind=str), bool(b.get("main", False)))
                      for i, b in enumerate(rd.get(n, "buses", p, kind=list)))
        lines = tuple(Line(
            id=str(ln.get("id", f"L{i + 1}")), from_bus=rd.get(ln, "from", f"{p}.lines[{i}]", kind=str),
            to_bus=rd.get(ln, "to", f"{p}.lines[{i}]", kind=str),
            reactance=rd.get(ln, "reactance", f"{p}.lines[{i}]"),
            capacity=rd.get(ln, "capacity", f"{p}.lines[{i}]"))
            for i, ln in enumerate(n.get("lines", [])))
        unit_bus = dict(n.get("unit_bus", {}))
        for u in (*ndres, *stu, *demand):
            if u.bus is not None:
                unit_bus.setdefault(u.id, u.bus)
        network = NetworkSpec(buses, lines, rd.get(n, "reference_bus", p, kind=str), unit_bus)

    def _opt(key):
        v = consts.get(key)
        return None if v is None else rd.get(consts, key, "$.constants")

    return CaseConfig(
        name=str(data.get("name", "case")), period_count=T, delta_t=delta_t,
        ndres=tuple(ndres), stu=tuple(stu), demand=tuple(demand), sessions=tuple(sessions),
        budgets=budgets, network=network, solver=dict(data.get("solver", {})),
        big_m=_opt("big_m"), epsilon=_opt("epsilon"))


def _forecasts_to_dict(fc: dict[str, ForecastBand]):
    if set(fc) == {DEFAULT_FORECAST}:
        return fc[DEFAULT_FORECAST].to_dict()
    return {k: v.to_dict() for k, v in fc.items()}


def _num(x: float):
    return None if x == math.inf else x


def case_to_dict(cfg: CaseConfig) -> dict:
    """Inverse of :func:`case_from_dict` (CSV references are inlined)."""
    out: dict[str, Any] = {"name": cfg.name, "periods": cfg.period_count, "delta_t": cfg.delta_t}
    consts = {k: v for k, v in (("big_m", cfg.big_m), ("epsilon", cfg.epsilon)) if v is not None}
    if consts:
        out["constants"] = consts
    out["fleet"] = {
        "ndres": [{"id": u.id, "p_min": u.p_min, "p_max": u.p_max, "op_cost": u.op_cost,
                   "sr_ramp_up": u.sr_ramp_up, "sr_ramp_down": u.sr_ramp_down,
                   "forecast": _forecasts_to_dict(u.forecasts), **({"bus": u.bus} if u.bus else {})}
                  for u in cfg.ndres],
        "stu": [{"id": u.id, "p_min": u.p_min, "p_max": u.p_max, "op_cost": u.op_cost,
                 "storage_capacity": u.storage_capacity, "pb_efficiency": u.pb_efficiency,
                 "sr_ramp_up": u.sr_ramp_up, "sr_ramp_down": u.sr_ramp_down,
                 "initial_storage": u.initial_storage,
                 "solar_field_forecast": _forecasts_to_dict(u.solar_field_forecasts),
                 **({"bus": u.bus} if u.bus else {})}
                for u in cfg.stu],
        "demand": [{"id": d.id, "p_min": d.p_min, "p_max": d.p_max, "ramp_up": _num(d.ramp_up),
                    "ramp_down": _num(d.ramp_down), "sr_ramp_up": d.sr_ramp_up, "sr_ramp_down": d.sr_ramp_down,
                    "flex_up": d.flex_up.tolist(), "flex_down": d.flex_down.tolist(),
                    "min_daily_energy": d.min_daily_energy,
                    "profiles": [{"cost": pr.cost, "median": pr.median.tolist(), "pos_dev": pr.pos_dev.tolist()}
                                 for pr in d.profiles],
                    **({"bus": d.bus} if d.bus else {})}
                   for d in cfg.demand],
    }
    for d in out["fleet"]["demand"]:
        for k in ("ramp_up", "ramp_down"):
            if d[k] is None:
                del d[k]
    out["sessions"] = []
    for s in cfg.sessions:
        entry = {"kind": s.kind, "start": s.grid.session_start, "rho": s.rho.tolist(), "kappa": s.kappa,
                 "sr_action_time": s.sr_action_time, "prices": {k: b.to_dict() for k, b in s.prices.items()}}
        if s.idm_index is not None:
            entry["idm_index"] = s.idm_index
        out["sessions"].append(entry)
    out["budgets"] = {k: b.to_dict() for k, b in cfg.budgets.items()}
    if cfg.network is not None:
        n = cfg.network
        out["network"] = {
            "buses": [{"id": b.id, "main": b.main} for b in n.buses],
            "lines": [{"id": ln.id, "from": ln.from_bus, "to": ln.to_bus, "reactance": ln.reactance,
                       "capacity": ln.capacity} for ln in n.lines],
            "reference_bus": n.reference_bus, "unit_bus": dict(n.unit_bus)}
    if cfg.solver:
        out["solver"] = dict(cfg.solver)
    return out


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Finding:
    level: str  # error | warning
    code: str
    message: str
    where: str = ""


@dataclass
class ValidationReport:
    findings: list[Finding]
    case: CaseConfig  # config with unit budgets clamped

    @property
    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.level == "error"]

    @property
    def warnings(self) -> list[Finding]:
        return [f for f in self.findings if f.level == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self):
        return bool(self.findings)


def positive_deviation_count(cfg: CaseConfig, unit_id: str, key: str) -> int:
    """Periods of the session window where the unit's uncertainty is live.

    Production units count periods with a strictly positive downward
    deviation; demands count periods where every profile has a strictly
    positive upward deviation.
    """
    win = cfg.session(key).grid.window
    for u in (*cfg.ndres, *cfg.stu):
        if u.id == unit_id:
            return int(np.sum(u.forecast(key).neg_dev[win.start:] > 0))
    for d in cfg.demand:
        if d.id == unit_id:
            live = np.all([pr.pos_dev[win.start:] > 0 for pr in d.profiles], axis=0)
            return int(np.sum(live))
    raise KeyError(unit_id)


def validate_case(cfg: CaseConfig) -> ValidationReport:
    out: list[Finding] = []

    def err(code, msg, where=""):
        out.append(Finding("error", code, msg, where))

    def warn(code, msg, where=""):
        out.append(Finding("warning", code, msg, where))

    T = cfg.period_count
    if cfg.delta_t <= 0:
        err("grid", "delta_t must be positive", "delta_t")

    def check_band(band: ForecastBand, where: str, power: bool):
        if np.any(band.pos_dev < 0) or np.any(band.neg_dev < 0):
            err("band", "deviations must be nonnegative", where)
        if power and np.any(band.lower < -1e-12):
            t = int(np.argmax(band.lower < -1e-12)) + 1
            err("band", f"median - neg_dev < 0 at t={t}", where)

    ids = cfg.unit_ids
    if len(set(ids)) != len(ids):
        err("ids", "unit ids must be unique")
    keys = [s.key for s in cfg.sessions]
    for u in cfg.ndres:
        if not 0 <= u.p_min <= u.p_max:
            err("bounds", "need 0 <= p_min <= p_max", u.id)
        if min(u.op_cost, u.sr_ramp_up, u.sr_ramp_down) < 0:
            err("bounds", "op_cost and ramps must be nonnegative", u.id)
        for k in keys:
            try:
                check_band(u.forecast(k), f"{u.id}.forecast[{k}]", power=True)
            except MissingForecastError as exc:
                err("forecast", str(exc.args[0]), u.id)
    for u in cfg.stu:
        if not 0 <= u.p_min <= u.p_max:
            err("bounds", "need 0 <= p_min <= p_max", u.id)
        if not 0 < u.pb_efficiency <= 1:
            err("bounds", "pb_efficiency must lie in (0, 1]", u.id)
        if not 0 <= u.initial_storage <= u.storage_capacity:
            err("bounds", "need 0 <= initial_storage <= storage_capacity", u.id)
        if min(u.op_cost, u.sr_ramp_up, u.sr_ramp_down) < 0:
            err("bounds", "op_cost and ramps must be nonnegative", u.id)
        for k in keys:
            try:
                check_band(u.forecast(k), f"{u.id}.solar_field_forecast[{k}]", power=True)
            except MissingForecastError as exc:
                err("forecast", str(exc.args[0]), u.id)
    for d in cfg.demand:
        if not d.profiles:
            err("profiles", "demand needs at least one profile", d.id)
        if not 0 <= d.p_min <= d.p_max:
            err("bounds", "need 0 <= p_min <= p_max", d.id)
        if d.min_daily_energy < 0:
            err("bounds", "min_daily_energy must be nonnegative", d.id)
        for arr, nm in ((d.flex_up, "flex_up"), (d.flex_down, "flex_down")):
            if np.any(arr < 0) or np.any(arr > 1):
                err("bounds", f"{nm} fractions must lie in [0, 1]", d.id)
        for j, pr in enumerate(d.profiles):
            if np.any(pr.pos_dev < 0):
                err("band", "profile deviations must be nonnegative", f"{d.id}.profiles[{j}]")
            if np.any(pr.median < 0):
                err("band", "profile medians must be nonnegative", f"{d.id}.profiles[{j}]")

    # session ordering and inputs
    rank = []
    for s in cfg.sessions:
        if s.kind == DAM_SRM:
            rank.append((0, 0))
        elif s.kind == SRM_IDM1:
            rank.append((1, 1))
        else:
            rank.append((2, s.idm_index or 0))
    if rank != sorted(rank) or len(set(rank)) != len(rank):
        err("sessions", "sessions must be ordered DAM_SRM, SRM_IDM1, IDM_k (k ascending) without repeats")
    if cfg.sessions and cfg.sessions[0].kind != DAM_SRM:
        err("sessions", "the first session must be DAM_SRM")
    has_srm = any(s.kind == SRM_IDM1 for s in cfg.sessions)
    for s in cfg.sessions:
        where = s.key
        if s.kind == IDM_K and (s.idm_index is None or s.idm_index < (2 if has_srm else 1)):
            err("sessions", "IDM index must be >= 2 when SRM_IDM1 is present (IDM#1 trades there)", where)
        if not 1 <= s.grid.session_start <= T:
            err("grid", f"session start must lie in [1, {T}]", where)
        if s.kind != IDM_K and s.grid.session_start != 1:
            err("grid", "DAM_SRM and SRM_IDM1 sessions cover the whole horizon (start = 1)", where)
        if not 0 <= s.kappa <= 1:
            err("kappa", f"kappa = {s.kappa} outside [0, 1]", where)
        if s.has_reserve_market and np.any(s.rho <= 0):
            err("rho", "rho must be positive where the reserve market is active", where)
        if s.sr_action_time <= 0:
            err("sr_action_time", "T^SR must be positive", where)
        for stream in s.streams:
            if stream not in s.prices:
                err("forecast", f"missing {stream} price forecast", where)
            else:
                check_band(s.prices[stream], f"{where}.prices.{stream}", power=False)
        band = s.prices.get("da" if s.kind == DAM_SRM else "id")
        if band is not None and cfg.demand_capacity > 0:
            win = s.grid.window
            if np.any(band.pos_dev[win.start:] <= 0):
                t = int(np.argmax(band.pos_dev[win.start:] <= 0)) + win.start + 1
                err("price_band", f"zero upward price deviation at t={t} while buying is possible", where)

    # budgets
    clamped: dict[str, BudgetSet] = {}
    session_map = {s.key: s for s in cfg.sessions}
    for key, b in cfg.budgets.items():
        if key not in session_map:
            warn("budgets", "budgets given for an undeclared session", key)
            clamped[key] = b
            continue
        n = session_map[key].grid.n_window
        for stream, g in b.price.items():
            if not 0 <= g <= n:
                err("budget", f"price budget {stream}={g} outside [0, {n}]", key)
        units = dict(b.unit)
        for uid, g in b.unit.items():
            if uid not in ids:
                err("budget", f"budget for unknown unit {uid}", key)
                continue
            if g != int(g) or g < 0:
                err("budget", f"unit budget {uid}={g} must be a nonnegative integer", key)
                continue
            try:
                cap = positive_deviation_count(cfg, uid, key)
            except MissingForecastError:
                continue
            if g > cap:
                warn("budget_clamp", f"unit budget {uid}={int(g)} exceeds the {cap} periods with positive "
                     f"deviation; clamped to {cap}", key)
                units[uid] = cap
            else:
                units[uid] = int(g)
        for uid, arr in b.per_period.items():
            if np.any(arr < 0) or np.any(arr > 1):
                err("budget", f"per-period budgets for {uid} must lie in [0, 1]", key)
        clamped[key] = BudgetSet(dict(b.price), units, dict(b.per_period))

    if cfg.network is not None:
        net = cfg.network
        bus_ids = [b.id for b in net.buses]
        if len(set(bus_ids)) != len(bus_ids):
            err("network", "bus ids must be unique")
        if net.reference_bus not in bus_ids:
            err("network", f"reference bus {net.reference_bus} is not a bus")
        if not net.main_buses:
            err("network", "at least one main-subregion bus is required")
        for ln in net.lines:
            if ln.reactance <= 0:
                err("network", "reactance must be positive", ln.id)
            if ln.capacity < 0:
                err("network", "line capacity must be nonnegative", ln.id)
            if ln.from_bus not in bus_ids or ln.to_bus not in bus_ids:
                err("network", "line references an unknown bus", ln.id)
        for uid in ids:
            if uid not in net.unit_bus:
                err("network", "unit is not mapped to a bus", uid)
            elif net.unit_bus[uid] not in bus_ids:
                err("network", f"unit mapped to unknown bus {net.unit_bus[uid]}", uid)

    return ValidationReport(out, dataclasses.replace(cfg, budgets=clamped))
