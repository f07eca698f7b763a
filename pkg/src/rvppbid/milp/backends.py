"""External solver backends driven through MPS text.

Contract: ``backend(mps_text, options) -> ExternalResult`` where the result
objective is already mapped back to the maximisation sense.
"""
from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field


@dataclass
class ExternalResult:
    status: str
    objective: float
    values: dict[str, float] = field(default_factory=dict)


def highs_available() -> bool:
    try:
        import highspy  # noqa: F401
    except ImportError:
        return False
    return True


def solve_mps_highs(mps_text: str, options: dict | None = None) -> ExternalResult:
    import highspy

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    for k, v in (options or {}).items():
        h.setOptionValue(k, v)
    with tempfile.NamedTemporaryFile("w", suffix=".mps", delete=False) as fh:
        fh.write(mps_text)
        path = fh.name
    try:
        h.readModel(path)
    finally:
        os.unlink(path)
    h.run()
    status = h.modelStatusToString(h.getModelStatus()).lower()
    if status == "empty":
        # no columns: the optimum is the objective offset
        return ExternalResult("optimal", -h.getLp().offset_)
    if status != "optimal":
        return ExternalResult(status, float("nan"))
    lp = h.getLp()
    sol = h.getSolution()
    names = [lp.col_names_[j] for j in range(lp.num_col_)]
    values = dict(zip(names, sol.col_value))
    return ExternalResult("optimal", -h.getInfo().objective_function_value, values)


BACKENDS = {"highs": solve_mps_highs}


REFERENCE = "reference"
BACKEND_ENV = "RVPP_SOLVER_BACKEND"


def default_backend() -> str:
    return os.environ.get(BACKEND_ENV, REFERENCE)


def solve_model(model, backend: str | None = None, options: dict | None = None):
    """Solve with the reference pipeline or an MPS-driven external backend.

    External results are mapped back to a :class:`Solution` over the
    model's variable order.
    """
    import numpy as np

    from .model import Solution
    from .mps import col_name, export_mps
    from .solve import SolveOptions, solve_reference

    backend = backend or default_backend()
    if backend == REFERENCE:
        opts = options if isinstance(options, SolveOptions) else SolveOptions(**(options or {}))
        return solve_reference(model, opts)
    if backend not in BACKENDS:
        raise ValueError(f"unknown solver backend {backend!r}; known: {[REFERENCE, *BACKENDS]}")
    res = BACKENDS[backend](export_mps(model), options if isinstance(options, dict) else None)
    x = np.array([res.values.get(col_name(j), 0.0) for j in range(model.n_vars)], dtype=float)
    status = res.status if res.status in (Solution.OPTIMAL, Solution.INFEASIBLE, Solution.UNBOUNDED) \
        else Solution.ITERATION_LIMIT if "limit" in res.status else Solution.INFEASIBLE
    if status == Solution.OPTIMAL:
        # snap binaries that the external solver returns within its own tolerance
        for j in model.binaries():
            x[j] = float(round(x[j]))
    return Solution(status, res.objective, x, info={"backend": backend, "external_status": res.status})
