"""Budget-controlled robust bound on one unit's uncertain power."""
from __future__ import annotations

import numpy as np

from ..milp.model import BINARY, DEMAND_ADD, LinExpr, ModelIR, RobustGroup, Var


def big_m_eps(max_dev: float, big_m: float | None = None, eps: float | None = None) -> tuple[float, float]:
    m = big_m if big_m is not None else 2.0 * max_dev + 1.0
    e = eps if eps is not None else 1e-6 * max(1.0, max_dev)
    return m, e


def add_robust_group(model: ModelIR, name: str, periods: list[int], budget: int, direction: str,
                     deviation: dict[int, LinExpr], deviations: np.ndarray | None = None,
                     profile_deviations: dict[int, np.ndarray] | None = None,
                     big_m: float | None = None, eps: float | None = None) -> dict[int, Var]:
    """Binary-selected worst-case deviation ``y_t`` over ``periods``.

    ``deviation[t]`` is the deviation as an expression (a constant for
    production, ``sum_p dev_p u_p`` for demands). Returns ``t -> y_t``.
    """
    if deviations is not None:
        max_dev = float(np.max(deviations)) if len(deviations) else 0.0
    else:
        max_dev = max((float(np.max(d)) for d in profile_deviations.values()), default=0.0)
    M, e = big_m_eps(max_dev, big_m, eps)
    v = model.add_var(f"v_{name}")
    chi, y, eta = [], {}, []
    for t in periods:
        tag = f"{name},{t + 1}"
        c = model.add_var(f"chi_{name}[{t + 1}]", kind=BINARY)
        yt = model.add_var(f"y_{name}[{t + 1}]")
        et = model.add_var(f"eta_{name}[{t + 1}]")
        dev = LinExpr.of(deviation[t])
        model.add_constr(yt <= dev, f"rob_ydev[{tag}]")
        if direction == DEMAND_ADD:
            model.add_constr(yt <= M * c, f"rob_yon[{tag}]")
        model.add_constr(yt >= v + et - M * (1 - c), f"rob_ylink[{tag}]")
        model.add_constr(v + et >= dev, f"rob_dual[{tag}]")
        model.add_constr(et >= e * c, f"rob_etalo[{tag}]")
        model.add_constr(et <= M * c, f"rob_etahi[{tag}]")
        chi.append(c.index)
        eta.append(et.index)
        y[t] = yt
    total = LinExpr({c: 1.0 for c in chi})
    model.add_constr(total.eq(budget), f"rob_budget[{name}]")
    sub = None if deviations is None else np.asarray(deviations, dtype=float)
    model.robust_groups.append(RobustGroup(
        name=name, chi=chi, y=[y[t].index for t in periods], v=v.index, eta=eta, budget=int(budget),
        direction=direction, periods=[t + 1 for t in periods], deviations=sub,
        profile_deviations=profile_deviations))
    return y
