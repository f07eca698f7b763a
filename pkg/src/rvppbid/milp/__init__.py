"""Solver-agnostic MILP layer: IR, robust presolve, simplex, MPS, checks."""
from .model import (
    BINARY, CONTINUOUS, DEMAND_ADD, PRODUCTION_CUT, Constraint, LinExpr, ModelIR,
    RobustGroup, Solution, UnfixedProfileError, Var, Variable,
)
from .mps import export_mps, mps_names
from .presolve import presolve_fix_robust_binaries, reduce_lp, top_budget_periods
from .simplex import solve_lp
from .solve import CombinatorialLimitError, SolveOptions, UnsupportedModelError, solve_reference
from .verify import VerificationReport, Violation, verify_solution

__all__ = [
    "BINARY", "CONTINUOUS", "DEMAND_ADD", "PRODUCTION_CUT", "CombinatorialLimitError",
    "Constraint", "LinExpr", "ModelIR", "RobustGroup", "Solution", "SolveOptions",
    "UnfixedProfileError", "UnsupportedModelError", "Var", "Variable", "VerificationReport",
    "Violation", "export_mps", "mps_names", "presolve_fix_robust_binaries", "reduce_lp",
    "solve_lp", "solve_reference", "top_budget_periods", "verify_solution",
]
