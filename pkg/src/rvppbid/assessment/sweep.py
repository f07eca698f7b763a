"""Budget sensitivity sweeps of the day-ahead session."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

from ..domain import DAM_SRM, BudgetSet, CaseConfig, positive_deviation_count
from ..formulation import PROPOSED
from ..sequence import SessionSolveError, fmt, run_session

ENERGY, PRICE, PRICE_ENERGY = "energy", "price", "price_energy"
CASES = (ENERGY, PRICE, PRICE_ENERGY)
MONO_TOL = 1e-6  # relative slack on the non-increasing check


class SweepError(RuntimeError):
    pass


@dataclass
class SweepRow:
    budget: float
    profit: float
    decomposition: dict[str, float]
    monotone: bool = True


@dataclass
class SweepResult:
    which: str
    mode: str
    rows: list[SweepRow] = field(default_factory=list)

    @property
    def budgets(self) -> list[float]:
        return [r.budget for r in self.rows]

    @property
    def profits(self) -> list[float]:
        return [r.profit for r in self.rows]

    @property
    def violations(self) -> list[float]:
        """Budgets where profit rose against the previous point."""
        return [r.budget for r in self.rows if not r.monotone]

    @property
    def monotone(self) -> bool:
        return not self.violations

    def saturation(self, rel: float = 1e-3) -> float | None:
        return saturation_point(self.budgets, self.profits, rel)

    def csv_rows(self) -> list[list[str]]:
        terms = sorted({k for r in self.rows for k in r.decomposition})
        out = [["budget", "profit", *terms, "monotone"]]
        for r in self.rows:
            out.append([fmt(r.budget), fmt(r.profit), *(fmt(r.decomposition.get(k, 0.0)) for k in terms),
                        "1" if r.monotone else "0"])
        return out

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            csv.writer(fh).writerows(self.csv_rows())
        return path


def saturation_point(budgets, profits, rel: float = 1e-3) -> float | None:
    """First budget from which every further step moves profit by less than ``rel`` (relative).

    None if the curve is still moving at its last step.
    """
    n = len(profits)
    if n == 0:
        return None
    sat = n - 1
    while sat > 0 and abs(profits[sat] - profits[sat - 1]) < rel * max(abs(profits[sat - 1]), 1e-12):
        sat -= 1
    if n > 1 and sat == n - 1:
        return None
    return budgets[sat]


def sweep_budgets_for(cfg: CaseConfig, value: float, which: str, key: str = DAM_SRM) -> BudgetSet:
    """Budgets of one sweep point; unit budgets are clamped to the live periods of each unit."""
    if which not in CASES:
        raise ValueError(f"unknown sweep case {which!r}; expected one of {CASES}")
    spec = cfg.session(key)
    n = spec.grid.n_window
    price, unit = {}, {}
    if which in (PRICE, PRICE_ENERGY):
        price = {s: float(min(value, n)) for s in spec.streams}
    if which in (ENERGY, PRICE_ENERGY):
        unit = {uid: int(min(int(value), positive_deviation_count(cfg, uid, key))) for uid in cfg.unit_ids}
    return BudgetSet(price, unit)


def sweep_budgets(cfg: CaseConfig, grid, which: str, mode: str = PROPOSED, key: str = DAM_SRM,
                  backend: str | None = None, solve_options=None) -> SweepResult:
    """Solve the session once per grid value and record the profit curve.

    Points where profit increases with the budget are flagged
    (``SweepRow.monotone`` False); a non-optimal solve raises
    :class:`SweepError` naming the point.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("empty budget grid")
    T = cfg.session(key).grid.n_window
    for g in grid:
        if not 0 <= g <= T:
            raise ValueError(f"budget {g} outside [0, {T}]")
    res = SweepResult(which, mode)
    prev = None
    for g in grid:
        budgets = sweep_budgets_for(cfg, g, which, key)
        try:
            entry, _ = run_session(cfg, key, None, mode, budgets, backend, solve_options)
        except SessionSolveError as exc:
            raise SweepError(f"sweep {which} at budget {g}: {exc}") from exc
        ok = prev is None or entry.objective <= prev + MONO_TOL * max(1.0, abs(prev))
        res.rows.append(SweepRow(float(g), entry.objective, dict(entry.decomposition), ok))
        prev = entry.objective
    return res


def parse_grid(text: str) -> list[float]:
    """``"0:24:1"`` (inclusive range) or ``"0,2,5"``."""
    text = text.strip()
    if not text:
        raise ValueError("empty budget grid")
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) not in (2, 3):
            raise ValueError(f"bad grid range {text!r}")
        lo, hi = parts[0], parts[1]
        step = parts[2] if len(parts) == 3 else 1.0
        if step <= 0:
            raise ValueError("grid step must be positive")
        out, k = [], 0
        while lo + k * step <= hi + 1e-9:
            out.append(round(lo + k * step, 9))
            k += 1
        if not out:
            raise ValueError("empty budget grid")
        return out
    return [float(x) for x in text.split(",") if x.strip()]
