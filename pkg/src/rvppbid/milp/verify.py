"""Post-solve checks against the original (un-presolved) model."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import BINARY, ModelIR, Solution


@dataclass
class Violation:
    kind: str  # constraint | bound | integrality | objective | missing
    name: str
    amount: float


@dataclass
class VerificationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def by_kind(self, kind: str) -> list[Violation]:
        return [v for v in self.violations if v.kind == kind]

    def structures(self) -> dict[str, int]:
        """Violated constraint families keyed by name prefix (before ``[``)."""
        out: dict[str, int] = {}
        for v in self.violations:
            key = v.name.split("[", 1)[0]
            out[key] = out.get(key, 0) + 1
        return out


def verify_solution(model: ModelIR, sol: Solution, tol: float = 1e-6,
                    int_tol: float = 1e-9, obj_rtol: float = 1e-6,
                    check_objective: bool = True) -> VerificationReport:
    rep = VerificationReport()
    x = np.asarray(sol.values, dtype=float)
    if x.shape != (model.n_vars,) or not np.all(np.isfinite(x)):
        rep.violations.append(Violation("missing", "values", float("nan")))
        return rep
    for c in model.constraints:
        if not c.coeffs:
            act, scale = 0.0, 1.0
        else:
            act = c.activity(x)
            scale = max(abs(a) for a in c.coeffs.values())
        if c.sense == "<=":
            gap = act - c.rhs
        elif c.sense == ">=":
            gap = c.rhs - act
        else:
            gap = abs(act - c.rhs)
        if gap / scale > tol:
            rep.violations.append(Violation("constraint", c.name, gap / scale))
    for j, v in enumerate(model.variables):
        if x[j] < v.lower - tol or x[j] > v.upper + tol:
            amount = max(v.lower - x[j], x[j] - v.upper)
            rep.violations.append(Violation("bound", v.name, amount))
        if v.kind == BINARY and min(abs(x[j]), abs(x[j] - 1.0)) > int_tol:
            rep.violations.append(Violation("integrality", v.name, min(abs(x[j]), abs(x[j] - 1.0))))
    if check_objective and sol.ok:
        recomputed = model.objective_value(x)
        if abs(recomputed - sol.objective) > obj_rtol * max(1.0, abs(recomputed)):
            rep.violations.append(Violation("objective", "objective", recomputed - sol.objective))
    return rep
