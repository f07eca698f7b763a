"""Structural presolve for robust budget groups, plus a light LP presolve."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .model import CONTINUOUS, ModelIR, RobustGroup


def top_budget_periods(deviations, budget: int) -> list[int]:
    """Positions of the ``budget`` largest deviations, lowest index on ties."""
    dev = np.asarray(deviations, dtype=float)
    if not 0 <= budget <= dev.size:
        raise ValueError(f"budget {budget} outside [0, {dev.size}]")
    order = sorted(range(dev.size), key=lambda t: (-dev[t], t))
    return sorted(order[:budget])


def _fix(model: ModelIR, idx: int, value: float) -> None:
    var = model.variables[idx]
    var.kind = CONTINUOUS
    var.lower = var.upper = float(value)


def presolve_fix_robust_binaries(model: ModelIR) -> ModelIR:
    """Fix every robust group to its worst-case active set.

    With ``eta = 0`` on inactive periods the dual ``v`` must cover every
    inactive deviation, while on active periods ``y = v + eta`` is squeezed
    to the full deviation. Both hold only when the active periods carry the
    ``budget`` largest deviations, so the binaries, ``y``, ``v`` and ``eta``
    are all determined. Rows touching ``v``/``eta`` are dropped; those
    variables are fixed to consistent values for reporting.
    """
    out = model.copy()
    drop_vars: set[int] = set()
    active_sets: dict[str, list[int]] = dict(out.meta.get("active_sets", {}))
    for g in out.robust_groups:
        dev = g.resolved_deviations(out)
        pos = top_budget_periods(dev, g.budget)
        active = set(pos)
        inactive_dev = [dev[i] for i in range(len(dev)) if i not in active]
        v_val = max(inactive_dev) if inactive_dev else 0.0
        for i, (chi, y, eta) in enumerate(zip(g.chi, g.y, g.eta)):
            on = i in active
            _fix(out, chi, 1.0 if on else 0.0)
            _fix(out, y, dev[i] if on else 0.0)
            _fix(out, eta, max(dev[i] - v_val, 0.0) if on else 0.0)
            drop_vars.add(eta)
        _fix(out, g.v, v_val)
        drop_vars.add(g.v)
        active_sets[g.name] = [g.periods[i] for i in pos]
    if drop_vars:
        out.constraints = [c for c in out.constraints if not (drop_vars & c.coeffs.keys())]
    out.robust_groups = []
    out.meta["active_sets"] = active_sets
    return out


class PresolveInfeasible(Exception):
    def __init__(self, message: str, row: str | None = None):
        super().__init__(message)
        self.row = row


@dataclass
class ReducedLP:
    """Minimisation LP over the free columns of a model."""

    c: np.ndarray
    A: sp.csc_matrix
    row_lo: np.ndarray
    row_hi: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    free_cols: np.ndarray
    fixed_values: np.ndarray  # full-length vector, valid on fixed columns
    row_names: list[str]
    offset: float  # objective contribution of fixed columns (max sense)

    def expand(self, x_reduced: np.ndarray) -> np.ndarray:
        x = self.fixed_values.copy()
        x[self.free_cols] = x_reduced
        return x


def reduce_lp(model: ModelIR, tol: float = 1e-9) -> ReducedLP:
    """Drop fixed columns and turn singleton rows into bounds, to a fixpoint."""
    n = model.n_vars
    lo = np.array([v.lower for v in model.variables], dtype=float)
    hi = np.array([v.upper for v in model.variables], dtype=float)
    rows = []
    for c in model.constraints:
        if c.sense == "<=":
            rl, ru = -math.inf, c.rhs
        elif c.sense == ">=":
            rl, ru = c.rhs, math.inf
        else:
            rl = ru = c.rhs
        rows.append([c.name, dict(c.coeffs), rl, ru])
    fixed = np.zeros(n, dtype=bool)
    val = np.zeros(n)

    def mark_fixed():
        newly = (~fixed) & np.isfinite(lo) & (hi - lo <= tol * np.maximum(1.0, np.abs(lo)))
        if np.any(lo > hi + 1e-7 * np.maximum(1.0, np.abs(lo))):
            bad = int(np.argmax(lo > hi + 1e-7 * np.maximum(1.0, np.abs(lo))))
            raise PresolveInfeasible(
                f"bounds cross for {model.variables[bad].name}: [{lo[bad]}, {hi[bad]}]")
        idx = np.flatnonzero(newly)
        fixed[idx] = True
        val[idx] = 0.5 * (lo[idx] + hi[idx])
        return set(idx.tolist())

    changed = mark_fixed()
    active_rows = list(range(len(rows)))
    while True:
        progress = False
        keep = []
        for ri in active_rows:
            name, coeffs, rl, ru = rows[ri]
            if changed & coeffs.keys():
                shift = 0.0
                for j in list(coeffs):
                    if fixed[j]:
                        shift += coeffs.pop(j) * val[j]
                rl -= shift
                ru -= shift
                rows[ri][2], rows[ri][3] = rl, ru
            if not coeffs:
                scale = max(1.0, abs(rl) if math.isfinite(rl) else 0.0, abs(ru) if math.isfinite(ru) else 0.0)
                if rl > 1e-7 * scale or ru < -1e-7 * scale:
                    raise PresolveInfeasible(f"row {name} infeasible after fixing ({rl:g} <= 0 <= {ru:g})", name)
                progress = True
                continue
            if len(coeffs) == 1:
                (j, a), = coeffs.items()
                if a > 0:
                    nlo, nhi = rl / a, ru / a
                else:
                    nlo, nhi = ru / a, rl / a
                if nlo > lo[j]:
                    lo[j] = nlo
                if nhi < hi[j]:
                    hi[j] = nhi
                if lo[j] > hi[j] and lo[j] - hi[j] <= 1e-7 * max(1.0, abs(lo[j])):
                    lo[j] = hi[j] = 0.5 * (lo[j] + hi[j])
                progress = True
                continue
            keep.append(ri)
        active_rows = keep
        changed = mark_fixed()
        if not progress and not changed:
            break
    free = np.flatnonzero(~fixed)
    col_of = -np.ones(n, dtype=np.int64)
    col_of[free] = np.arange(free.size)
    data, ri_idx, ci_idx = [], [], []
    row_lo, row_hi, names = [], [], []
    for new_r, ri in enumerate(active_rows):
        name, coeffs, rl, ru = rows[ri]
        for j, a in coeffs.items():
            data.append(a)
            ri_idx.append(new_r)
            ci_idx.append(col_of[j])
        row_lo.append(rl)
        row_hi.append(ru)
        names.append(name)
    A = sp.csc_matrix((data, (ri_idx, ci_idx)), shape=(len(active_rows), free.size))
    obj = np.zeros(n)
    for j, cval in model.objective.items():
        obj[j] += cval
    offset = model.objective_constant + float(obj[fixed] @ val[fixed])
    return ReducedLP(
        c=-obj[free], A=A, row_lo=np.array(row_lo, dtype=float), row_hi=np.array(row_hi, dtype=float),
        lo=lo[free], hi=hi[free], free_cols=free, fixed_values=val, row_names=names, offset=offset,
    )
