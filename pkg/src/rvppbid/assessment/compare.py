"""Side-by-side comparison of the proposed model and the even-cut baseline."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..domain import DAM_SRM, BudgetSet, CaseConfig
from ..formulation import BASELINE23, PROPOSED
from ..sequence import SessionEntry, fmt, run_session
from .evaluate import AssessmentReport, out_of_sample_evaluate
from .scenarios import ScenarioSet
from .sweep import SweepResult, sweep_budgets


def possible_unfeasible(cfg: CaseConfig, entry: SessionEntry, key: str = DAM_SRM) -> dict[str, np.ndarray]:
    """Per-hour energy each ND-RES unit is scheduled for (power plus up reserve) beyond its
    worst-case availability ``median - neg_dev``."""
    dt = cfg.delta_t
    out = {}
    for u in cfg.ndres:
        band = u.forecast(key)
        sched = (entry.unit_power[u.id] + entry.unit_r_up[u.id]) * dt
        out[u.id] = np.maximum(0.0, sched - band.lower * dt)
    return out


def worst_hours(cfg: CaseConfig, unit_id: str, k: int, key: str = DAM_SRM) -> np.ndarray:
    """Indices of the ``k`` largest downward deviations (ties to the earlier hour)."""
    band = next(u for u in cfg.ndres if u.id == unit_id).forecast(key)
    order = np.lexsort((np.arange(band.T), -band.neg_dev))
    return np.sort(order[:k])


@dataclass
class ModelComparison:
    proposed: SessionEntry
    baseline: SessionEntry
    area_proposed: dict[str, np.ndarray]
    area_baseline: dict[str, np.ndarray]
    budgets: BudgetSet
    assessment: dict[str, AssessmentReport] = field(default_factory=dict)
    curves: dict[str, SweepResult] = field(default_factory=dict)

    def area_on(self, unit_id: str, hours) -> tuple[float, float]:
        h = np.asarray(hours, dtype=int)
        return float(np.sum(self.area_proposed[unit_id][h])), float(np.sum(self.area_baseline[unit_id][h]))

    def csv_rows(self) -> list[list[str]]:
        uids = list(self.area_proposed)
        head = ["t", "p_proposed", "p_baseline"]
        for u in uids:
            head += [f"{u}_area_proposed", f"{u}_area_baseline"]
        rows = [head]
        for t in range(len(self.proposed.p_trade)):
            row = [str(t + 1), fmt(self.proposed.p_trade[t]), fmt(self.baseline.p_trade[t])]
            for u in uids:
                row += [fmt(self.area_proposed[u][t]), fmt(self.area_baseline[u][t])]
            rows.append(row)
        return rows

    def to_dict(self) -> dict:
        out = {
            "objective": {"proposed": float(fmt(self.proposed.objective)),
                          "baseline23": float(fmt(self.baseline.objective))},
            "possible_unfeasible_total": {
                u: {"proposed": float(fmt(self.area_proposed[u].sum())),
                    "baseline23": float(fmt(self.area_baseline[u].sum()))} for u in self.area_proposed},
            "budgets": self.budgets.to_dict(),
        }
        if self.assessment:
            out["assessment"] = {k: {"profit_av": float(fmt(r.profit_av)), "penalty_av": float(fmt(r.penalty_av)),
                                     "net": float(fmt(r.net))} for k, r in self.assessment.items()}
        if self.curves:
            out["curves"] = {k: {"budget": c.budgets, "profit": [float(fmt(p)) for p in c.profits]}
                             for k, c in self.curves.items()}
        return out


def compare_models(cfg: CaseConfig, budgets: BudgetSet | None = None, scenarios: ScenarioSet | None = None,
                   Z: float = 1000.0, key: str = DAM_SRM, curve_grid=None, curve_which: str = "energy",
                   backend: str | None = None) -> ModelComparison:
    """Solve both models with the same budgets (the baseline spreads each unit budget
    evenly, Γ/T per period, unless ``budgets.per_period`` says otherwise)."""
    budgets = budgets if budgets is not None else cfg.budgets_for(key)
    prop, _ = run_session(cfg, key, None, PROPOSED, budgets, backend)
    base, _ = run_session(cfg, key, None, BASELINE23, budgets, backend)
    res = ModelComparison(prop, base, possible_unfeasible(cfg, prop, key), possible_unfeasible(cfg, base, key),
                          budgets)
    if scenarios is not None:
        res.assessment = {PROPOSED: out_of_sample_evaluate(cfg, prop, scenarios, Z),
                          BASELINE23: out_of_sample_evaluate(cfg, base, scenarios, Z)}
    if curve_grid is not None:
        res.curves = {m: sweep_budgets(cfg, curve_grid, curve_which, m, key, backend) for m in (PROPOSED, BASELINE23)}
    return res
