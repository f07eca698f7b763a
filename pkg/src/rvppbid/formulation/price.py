"""Budgeted protection of market income against price deviations.

For traded quantities ``x_t`` the income reduction is the budgeted worst
case ``max_z sum_t loss_t(x_t) z_t`` with ``sum z <= Gamma``, ``0 <= z <= 1``,
written through its LP dual: ``v + eta_t >= loss_t`` and a reduction of
``Gamma v + sum eta``. Per unit of energy, selling loses the downward
deviation and buying loses the upward one.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..domain import ForecastBand
from ..milp.model import LinExpr, ModelIR, Var


@dataclass
class PriceTerms:
    v: Var
    eta: dict[int, Var]
    y: dict[int, Var]  # signed streams only
    reduction: LinExpr  # Gamma v + sum eta (subtracted from the objective)


def add_price_robust_terms(model: ModelIR, name: str, x: dict[int, LinExpr], band: ForecastBand,
                           budget: float, signed: bool, delta_t: float = 1.0,
                           can_buy: bool = True) -> PriceTerms:
    """Add the dual block for one price stream; returns handles.

    ``x`` maps period -> traded quantity. The signed link is
    ``-(neg/pos) y <= x dt <= y``, multiplied through by ``pos`` so a zero
    downward deviation does not divide. When ``neg_dev = 0`` that link would
    forbid buying, so the period instead gets ``v + eta >= -pos * x dt``.
    The caller must not combine buying with a zero upward deviation.
    """
    v = model.add_var(f"v_{name}")
    eta: dict[int, Var] = {}
    y: dict[int, Var] = {}
    for t, xt in x.items():
        tag = f"{name},{t + 1}"
        lam_hat = float(band.pos_dev[t])
        lam_chk = float(band.neg_dev[t])
        eta[t] = model.add_var(f"eta_{name}[{t + 1}]")
        q = LinExpr.of(xt) * (delta_t if signed else 1.0)
        if not signed:
            # quantities are nonnegative, so the optimal y equals q; substitute it
            model.add_constr(v + eta[t] >= lam_chk * q, f"price_dual[{tag}]")
            continue
        y[t] = model.add_var(f"y_{name}[{t + 1}]")
        model.add_constr(v + eta[t] >= lam_chk * y[t], f"price_dual[{tag}]")
        model.add_constr(q <= y[t], f"price_link_hi[{tag}]")
        if lam_hat <= 0.0 and can_buy:
            raise ValueError(f"price stream {name}: zero upward deviation at t={t + 1} while buying is possible")
        if lam_chk > 0.0:
            # -(neg/pos) y <= q  <=>  pos q + neg y >= 0
            model.add_constr(lam_hat * q + lam_chk * y[t] >= 0.0, f"price_link_lo[{tag}]")
        elif can_buy:
            model.add_constr(v + eta[t] >= -lam_hat * q, f"price_buy[{tag}]")
    reduction = budget * LinExpr.of(v) + LinExpr({e.index: 1.0 for e in eta.values()})
    return PriceTerms(v, eta, y, reduction)

