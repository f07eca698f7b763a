"""Exhaustive solve of the faithful robust MILP (test oracle, small T only).

Every robust group's binaries are enumerated over all subsets of size
``budget`` and every profile choice is tried; each resulting LP keeps the
big-M / epsilon rows intact, so nothing here relies on the worst-period
argument used by :func:`presolve_fix_robust_binaries`.
"""
from __future__ import annotations

import itertools

import numpy as np

from .model import ModelIR, Solution
from .solve import SolveOptions, _profile_combinations, _solve_lp_model


def solve_by_enumeration(model: ModelIR, opts: SolveOptions | None = None,
                         max_combinations: int = 200_000) -> Solution:
    opts = opts or SolveOptions()
    groups = model.robust_groups
    subsets = [list(itertools.combinations(range(len(g.chi)), g.budget)) for g in groups]
    profiles = _profile_combinations(model)
    total = int(np.prod([len(s) for s in subsets] + [len(p) for p in profiles]))
    if total > max_combinations:
        raise ValueError(f"{total} combinations is too many for enumeration")
    best: Solution | None = None
    feasible = 0
    for combo in itertools.product(*profiles):
        for pick in itertools.product(*subsets):
            trial = model.copy()
            for members, u_on in zip(trial.choice_sets, combo):
                for u in members:
                    trial.fix(u, 1.0 if u == u_on else 0.0)
            active_sets = {}
            for g, chosen in zip(trial.robust_groups, pick):
                on = set(chosen)
                for i, c in enumerate(g.chi):
                    trial.fix(c, 1.0 if i in on else 0.0)
                active_sets[g.name] = [g.periods[i] for i in chosen]
            sol = _solve_lp_model(trial, opts)
            if not sol.ok:
                continue
            feasible += 1
            sol.active_sets = active_sets
            if best is None or sol.objective > best.objective + 1e-9 * max(1.0, abs(best.objective)):
                best = sol
    if best is None:
        return Solution(Solution.INFEASIBLE, np.nan, np.zeros(model.n_vars), info={"feasible": 0})
    best.info["feasible"] = feasible
    best.info["combinations"] = total
    return best
