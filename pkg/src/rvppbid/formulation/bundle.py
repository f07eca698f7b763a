"""Session model container and the starred (fixed prior-session) results."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..domain import TimeGrid
from ..milp.model import LinExpr, ModelIR, Solution, Var

PROPOSED = "proposed"
DETERMINISTIC = "deterministic"
BASELINE23 = "baseline23"
MODES = (PROPOSED, DETERMINISTIC, BASELINE23)


def trade_label(key: str) -> str:
    """Short market label used in variable names: da, id1, id4, ..."""
    if key == "DAM_SRM":
        return "da"
    if key == "SRM_IDM1":
        return "id1"
    return "id" + key.split("_", 1)[1]


@dataclass
class StarredResults:
    """Decisions cleared in earlier sessions, used as parameters later on.

    Arrays span the full horizon. ``p_id``/``unit_id`` are keyed by IDM
    index; ``unit_r_up``/``unit_r_dn``/``storage`` hold the most recent
    session's unit schedule (needed for horizon-wide couplings).
    """

    T: int
    p_da: np.ndarray | None = None
    r_up: np.ndarray | None = None
    r_dn: np.ndarray | None = None
    p_id: dict[int, np.ndarray] = field(default_factory=dict)
    unit_da: dict[str, np.ndarray] = field(default_factory=dict)
    unit_id: dict[int, dict[str, np.ndarray]] = field(default_factory=dict)
    unit_r_up: dict[str, np.ndarray] = field(default_factory=dict)
    unit_r_dn: dict[str, np.ndarray] = field(default_factory=dict)
    profiles: dict[str, int] = field(default_factory=dict)
    storage: dict[str, np.ndarray] = field(default_factory=dict)

    def trade_fixed(self) -> np.ndarray:
        out = np.zeros(self.T) if self.p_da is None else np.array(self.p_da, dtype=float)
        for series in self.p_id.values():
            out = out + series
        return out

    def unit_fixed(self, uid: str) -> np.ndarray:
        out = np.array(self.unit_da.get(uid, np.zeros(self.T)), dtype=float)
        for k in sorted(self.unit_id):
            out = out + self.unit_id[k].get(uid, 0.0)
        return out

    def reserve_fixed(self) -> tuple[np.ndarray, np.ndarray]:
        z = np.zeros(self.T)
        return (z if self.r_up is None else np.asarray(self.r_up, float),
                z if self.r_dn is None else np.asarray(self.r_dn, float))

    def copy(self) -> "StarredResults":
        import copy

        return copy.deepcopy(self)


@dataclass
class UnitHandles:
    """Per-period expressions of one unit's session-total power and reserves."""

    kind: str  # ndres | stu | demand
    power: dict[int, LinExpr] = field(default_factory=dict)  # t -> total power (consumption for demand)
    r_up: dict[int, LinExpr] = field(default_factory=dict)
    r_dn: dict[int, LinExpr] = field(default_factory=dict)
    extra: dict[str, dict[int, LinExpr]] = field(default_factory=dict)


@dataclass
class SessionModelBundle:
    model: ModelIR
    kind: str
    key: str
    mode: str
    grid: TimeGrid
    # role name -> {t: Var}, e.g. "p_trade", "r_up", "p[wind]", "u[load]"
    roles: dict[str, dict[int, Var]] = field(default_factory=dict)
    # per-period affine expressions, fixed parts included ("trade_total")
    exprs: dict[str, dict[int, LinExpr]] = field(default_factory=dict)
    units: dict[str, UnitHandles] = field(default_factory=dict)
    # objective decomposition: name -> expression; these sum to the objective
    terms: dict[str, LinExpr] = field(default_factory=dict)
    # single-bus balance row ids per state, removed by the network extension
    balance_rows: list[int] = field(default_factory=list)
    # demand id -> profile selector vars (DAM) in profile order
    selectors: dict[str, list[Var]] = field(default_factory=dict)
    starred: StarredResults | None = None
    info: dict = field(default_factory=dict)

    @property
    def window(self) -> range:
        return self.grid.window

    def role(self, name: str) -> dict[int, Var]:
        return self.roles.setdefault(name, {})

    def add_term(self, name: str, expr) -> None:
        expr = LinExpr.of(expr)
        self.model.add_objective(expr)
        if name in self.terms:
            self.terms[name] = self.terms[name] + expr
        else:
            self.terms[name] = expr

    def decompose(self, sol: Solution) -> dict[str, float]:
        return {k: e.value(sol.values) for k, e in self.terms.items()}

    def series(self, sol: Solution, name: str, source: str = "exprs") -> np.ndarray:
        """Full-horizon values of a role or expression family (0 outside window)."""
        out = np.zeros(self.grid.period_count)
        table = self.exprs if source == "exprs" else self.roles
        for t, e in table.get(name, {}).items():
            out[t] = sol.value(e) if isinstance(e, (LinExpr, Var)) else float(e)
        return out
