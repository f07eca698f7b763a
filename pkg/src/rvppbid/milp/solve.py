"""Reference MILP pipeline: profile enumeration, robust presolve, simplex."""
from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass

import numpy as np

from .model import BINARY, ModelIR, Solution
from .presolve import PresolveInfeasible, presolve_fix_robust_binaries, reduce_lp
from .simplex import STATUS_INFEASIBLE, STATUS_OPTIMAL, STATUS_UNBOUNDED, solve_lp

log = logging.getLogger(__name__)


class CombinatorialLimitError(RuntimeError):
    """Too many profile combinations for enumeration; use an external backend."""


class UnsupportedModelError(ValueError):
    pass


@dataclass
class SolveOptions:
    profile_cap: int = 64
    max_iter: int = 200_000
    lp_engine: str = "simplex"  # or "highs" (scipy) for cross-checks


def _solve_lp_model(model: ModelIR, opts: SolveOptions) -> Solution:
    try:
        red = reduce_lp(model)
    except PresolveInfeasible as exc:
        x = np.array([0.5 * (v.lower + v.upper) if np.isfinite(v.lower + v.upper) else 0.0
                      for v in model.variables])
        return Solution(Solution.INFEASIBLE, np.nan, x, info={"reason": str(exc), "iterations": 0})
    if opts.lp_engine == "highs":
        res = _scipy_lp(red)
        if res is None:
            return Solution(Solution.INFEASIBLE, np.nan, red.expand(np.clip(np.zeros(red.lo.size), red.lo, red.hi)),
                            info={"iterations": 0})
        x = red.expand(res)
        return Solution(Solution.OPTIMAL, model.objective_value(x), x, info={"iterations": 0})
    res = solve_lp(red.c, red.A, red.row_lo, red.row_hi, red.lo, red.hi, max_iter=opts.max_iter)
    x = red.expand(res.x)
    info = {"iterations": res.iterations, "lp_rows": red.A.shape[0], "lp_cols": red.A.shape[1]}
    if res.status == STATUS_OPTIMAL:
        return Solution(Solution.OPTIMAL, model.objective_value(x), x, info=info)
    status = {STATUS_INFEASIBLE: Solution.INFEASIBLE, STATUS_UNBOUNDED: Solution.UNBOUNDED}.get(
        res.status, Solution.ITERATION_LIMIT)
    info["phase1_infeasibility"] = res.phase1_infeasibility
    return Solution(status, np.nan, x, info=info)


def _scipy_lp(red):
    import scipy.sparse as sp
    from scipy.optimize import linprog

    eq = red.row_lo == red.row_hi
    ub_rows = ~eq & np.isfinite(red.row_hi)
    lb_rows = ~eq & np.isfinite(red.row_lo)
    A = red.A.tocsr()
    A_ub = sp.vstack([A[ub_rows], -A[lb_rows]]) if (ub_rows.any() or lb_rows.any()) else None
    b_ub = np.concatenate([red.row_hi[ub_rows], -red.row_lo[lb_rows]]) if A_ub is not None else None
    res = linprog(red.c, A_ub=A_ub, b_ub=b_ub,
                  A_eq=A[eq] if eq.any() else None, b_eq=red.row_lo[eq] if eq.any() else None,
                  bounds=np.column_stack([red.lo, red.hi]), method="highs")
    return res.x if res.status == 0 else None


def _profile_combinations(model: ModelIR):
    choices = []
    for members in model.choice_sets:
        fixed_on = [u for u in members if model.variables[u].lower >= 0.5]
        if fixed_on:
            choices.append([fixed_on[0]])
        else:
            choices.append([u for u in members if model.variables[u].upper >= 0.5])
    return choices


def solve_reference(model: ModelIR, opts: SolveOptions | None = None) -> Solution:
    """Solve a robust bidding MILP exactly.

    The only binaries allowed are robust-group selectors and one-hot
    profile selectors. Every profile combination is enumerated; for each,
    the robust groups are presolved away and the remaining LP goes to the
    simplex. The best feasible combination wins (first one on ties).
    """
    opts = opts or SolveOptions()
    t0 = time.perf_counter()
    model.validate()
    chi = {c for g in model.robust_groups for c in g.chi}
    selectors = {u for s in model.choice_sets for u in s}
    stray = [model.variables[b].name for b in model.binaries()
             if b not in chi and b not in selectors and model.variables[b].lower != model.variables[b].upper]
    if stray:
        raise UnsupportedModelError(f"binaries outside robust groups/profile sets: {stray[:5]}")
    choices = _profile_combinations(model)
    n_combos = int(np.prod([len(c) for c in choices])) if choices else 1
    if n_combos > opts.profile_cap:
        raise CombinatorialLimitError(
            f"{n_combos} profile combinations exceed the cap of {opts.profile_cap}; export MPS for an external solver")
    best: Solution | None = None
    fallback: Solution | None = None
    statuses = []
    iterations = 0
    for combo in itertools.product(*choices):
        trial = model.copy()
        for members, pick in zip(trial.choice_sets, combo):
            for u in members:
                trial.fix(u, 1.0 if u == pick else 0.0)
                trial.variables[u].kind = BINARY
        fixed = presolve_fix_robust_binaries(trial)
        sol = _solve_lp_model(fixed, opts)
        sol.active_sets = dict(fixed.meta.get("active_sets", {}))
        sol.info["profile_choice"] = [model.variables[u].name for u in combo]
        iterations += sol.info.get("iterations", 0)
        statuses.append(sol.status)
        if sol.ok:
            if best is None or sol.objective > best.objective + 1e-9 * max(1.0, abs(best.objective)):
                best = sol
        elif fallback is None or sol.status == Solution.UNBOUNDED:
            fallback = sol
    if best is None or Solution.UNBOUNDED in statuses:
        best = fallback
    best.info["combinations"] = n_combos
    best.info["iterations_total"] = iterations
    best.info["statuses"] = statuses
    best.info["seconds"] = time.perf_counter() - t0
    return best
