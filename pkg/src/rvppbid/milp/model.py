"""Solver-agnostic MILP representation.

Models are always maximisation problems. Variables are referenced by their
integer position in ``ModelIR.variables``; the :class:`Var` handle and
:class:`LinExpr` give a small algebra so builders can write
``m.add_constr(p + r_up <= cap, "trade_cap[3]")``.
"""
from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

CONTINUOUS = "continuous"
BINARY = "binary"

PRODUCTION_CUT = "production-cut"
DEMAND_ADD = "demand-add"

SENSES = ("<=", "=", ">=")


class LinExpr:
    """Sparse affine expression ``sum(coef * var) + const``."""

    __slots__ = ("terms", "const")

    def __init__(self, terms: Mapping[int, float] | None = None, const: float = 0.0):
        self.terms: dict[int, float] = dict(terms) if terms else {}
        self.const = float(const)

    @staticmethod
    def of(value) -> "LinExpr":
        if isinstance(value, LinExpr):
            return value
        if isinstance(value, Var):
            return LinExpr({value.index: 1.0})
        return LinExpr(const=float(value))

    def copy(self) -> "LinExpr":
        return LinExpr(self.terms, self.const)

    def add_term(self, index: int, coef: float) -> "LinExpr":
        if coef:
            self.terms[index] = self.terms.get(index, 0.0) + coef
        return self

    def __iadd__(self, other):
        other = LinExpr.of(other)
        for k, v in other.terms.items():
            self.terms[k] = self.terms.get(k, 0.0) + v
        self.const += other.const
        return self

    def __add__(self, other):
        out = self.copy()
        out += other
        return out

    __radd__ = __add__

    def __neg__(self):
        return LinExpr({k: -v for k, v in self.terms.items()}, -self.const)

    def __sub__(self, other):
        return self + (-LinExpr.of(other))

    def __rsub__(self, other):
        return LinExpr.of(other) - self

    def __mul__(self, scalar):
        s = float(scalar)
        return LinExpr({k: v * s for k, v in self.terms.items()}, self.const * s)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / float(scalar))

    def __le__(self, other):
        return ConstraintSpec(self - other, "<=")

    def __ge__(self, other):
        return ConstraintSpec(self - other, ">=")

    def eq(self, other) -> "ConstraintSpec":
        return ConstraintSpec(self - other, "=")

    def value(self, x: np.ndarray) -> float:
        return self.const + sum(v * x[k] for k, v in self.terms.items())

    def __repr__(self):
        body = " + ".join(f"{v:g}*x{k}" for k, v in sorted(self.terms.items()))
        return f"LinExpr({body or '0'} + {self.const:g})"


class Var:
    """Handle to a model variable; arithmetic promotes to :class:`LinExpr`."""

    __slots__ = ("index",)

    def __init__(self, index: int):
        self.index = index

    def __index__(self):
        return self.index

    def __hash__(self):
        return hash(self.index)

    def __eq__(self, other):
        return isinstance(other, Var) and other.index == self.index

    def _e(self):
        return LinExpr({self.index: 1.0})

    def __add__(self, other):
        return self._e() + other

    __radd__ = __add__

    def __sub__(self, other):
        return self._e() - other

    def __rsub__(self, other):
        return LinExpr.of(other) - self._e()

    def __neg__(self):
        return -self._e()

    def __mul__(self, s):
        return self._e() * s

    __rmul__ = __mul__

    def __le__(self, other):
        return self._e() <= other

    def __ge__(self, other):
        return self._e() >= other

    def eq(self, other):
        return self._e().eq(other)

    def __repr__(self):
        return f"Var({self.index})"


@dataclass
class ConstraintSpec:
    """``expr (sense) 0`` produced by comparison operators."""

    expr: LinExpr
    sense: str


@dataclass
class Variable:
    name: str
    kind: str = CONTINUOUS
    lower: float = 0.0
    upper: float = math.inf


@dataclass
class Constraint:
    name: str
    coeffs: dict[int, float]
    sense: str
    rhs: float

    def activity(self, x: np.ndarray) -> float:
        return sum(v * x[k] for k, v in self.coeffs.items())


@dataclass
class RobustGroup:
    """Binary-controlled budget block ``sum(chi) = budget`` over one unit.

    ``deviations`` is known up front for production groups. Demand groups
    whose deviation depends on the selected profile carry
    ``profile_deviations`` (selector var id -> per-period deviation) instead.
    """

    name: str
    chi: list[int]
    y: list[int]
    v: int
    eta: list[int]
    budget: int
    direction: str
    periods: list[int]
    deviations: np.ndarray | None = None
    profile_deviations: dict[int, np.ndarray] | None = None

    def resolved_deviations(self, model: "ModelIR") -> np.ndarray:
        if self.deviations is not None:
            return np.asarray(self.deviations, dtype=float)
        if not self.profile_deviations:
            raise ValueError(f"robust group {self.name} has no deviation data")
        dev = np.zeros(len(self.chi))
        for u, d in self.profile_deviations.items():
            var = model.variables[u]
            if var.lower != var.upper:
                raise UnfixedProfileError(
                    f"robust group {self.name}: profile selector {var.name} is not fixed"
                )
            dev += var.lower * np.asarray(d, dtype=float)
        return dev


class UnfixedProfileError(ValueError):
    """A demand robust group still depends on an open profile binary."""


@dataclass
class ModelIR:
    name: str = "model"
    variables: list[Variable] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objective: dict[int, float] = field(default_factory=dict)
    objective_constant: float = 0.0
    robust_groups: list[RobustGroup] = field(default_factory=list)
    # one-hot binary selector sets (exactly one member equals 1)
    choice_sets: list[list[int]] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    sense = "maximize"

    # -- building ---------------------------------------------------------
    def add_var(self, name: str, lower: float = 0.0, upper: float = math.inf,
                kind: str = CONTINUOUS) -> Var:
        if kind == BINARY:
            lower, upper = max(0.0, lower), min(1.0, upper)
        if lower > upper:
            raise ValueError(f"variable {name}: lower {lower} > upper {upper}")
        self.variables.append(Variable(name, kind, float(lower), float(upper)))
        return Var(len(self.variables) - 1)

    def add_constr(self, spec: ConstraintSpec, name: str) -> int:
        if spec.sense not in SENSES:
            raise ValueError(f"bad sense {spec.sense!r}")
        coeffs = {k: v for k, v in spec.expr.terms.items() if v != 0.0}
        for k in coeffs:
            if not 0 <= k < len(self.variables):
                raise IndexError(f"constraint {name} references undeclared variable {k}")
        self.constraints.append(Constraint(name, coeffs, spec.sense, -spec.expr.const))
        return len(self.constraints) - 1

    def add_objective(self, expr) -> None:
        expr = LinExpr.of(expr)
        for k, v in expr.terms.items():
            self.objective[k] = self.objective.get(k, 0.0) + v
        self.objective_constant += expr.const

    def fix(self, var: Var | int, value: float) -> None:
        v = self.variables[int(var)]
        v.lower = v.upper = float(value)

    # -- queries ----------------------------------------------------------
    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    def binaries(self) -> list[int]:
        return [i for i, v in enumerate(self.variables) if v.kind == BINARY]

    def objective_value(self, x: np.ndarray) -> float:
        return self.objective_constant + sum(c * x[k] for k, c in self.objective.items())

    def index_of(self, name: str) -> int:
        lookup = self.meta.get("_name_index")
        if lookup is None or len(lookup) != len(self.variables):
            lookup = {v.name: i for i, v in enumerate(self.variables)}
            self.meta["_name_index"] = lookup
        return lookup[name]

    def copy(self) -> "ModelIR":
        # field-wise copy; a plain deepcopy dominates solve time on 24-period models
        meta = {k: v for k, v in self.meta.items() if k != "_name_index"}
        return ModelIR(
            name=self.name,
            variables=[Variable(v.name, v.kind, v.lower, v.upper) for v in self.variables],
            constraints=[Constraint(c.name, dict(c.coeffs), c.sense, c.rhs) for c in self.constraints],
            objective=dict(self.objective),
            objective_constant=self.objective_constant,
            robust_groups=[copy.copy(g) for g in self.robust_groups],
            choice_sets=[list(s) for s in self.choice_sets],
            meta=copy.deepcopy(meta),
        )

    def validate(self) -> None:
        seen: set[int] = set()
        for g in self.robust_groups:
            if len(g.chi) != len(g.y) or len(g.chi) != len(g.eta):
                raise ValueError(f"robust group {g.name}: inconsistent family sizes")
            for c in g.chi:
                if c in seen:
                    raise ValueError(f"binary {self.variables[c].name} in two robust groups")
                seen.add(c)


@dataclass
class Solution:
    status: str
    objective: float
    values: np.ndarray
    active_sets: dict[str, list[int]] = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration-limit"

    @property
    def ok(self) -> bool:
        return self.status == self.OPTIMAL

    def value(self, item) -> float | np.ndarray:
        if isinstance(item, (Var, int, np.integer)):
            return float(self.values[int(item)])
        if isinstance(item, LinExpr):
            return item.value(self.values)
        if isinstance(item, Iterable):
            return np.array([self.value(i) for i in item])
        raise TypeError(type(item))
