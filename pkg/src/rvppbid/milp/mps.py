"""Fixed-format MPS export.

MPS minimises, our models maximise: the file's objective row holds the
negated coefficients, so an external optimum ``z`` maps back to ``-z``.
Columns and rows get positional 8-character names (``C0000001``,
``R0000001``) in declaration order; :func:`mps_names` recovers the mapping.
"""
from __future__ import annotations

import math

from .model import BINARY, ModelIR

OBJ_ROW = "OBJ"
RHS_SET = "RHS"
BOUND_SET = "BND"
RANGE_SET = "RNG"

_SENSE_CODE = {"<=": "L", "=": "E", ">=": "G"}


def col_name(j: int) -> str:
    return f"C{j + 1:07d}"


def row_name(i: int) -> str:
    return f"R{i + 1:07d}"


def mps_names(model: ModelIR) -> tuple[dict[str, str], dict[str, str]]:
    """(column code -> variable name, row code -> constraint name)."""
    cols = {col_name(j): v.name for j, v in enumerate(model.variables)}
    rows = {row_name(i): c.name for i, c in enumerate(model.constraints)}
    return cols, rows


def fmt_number(x: float) -> str:
    """Shortest text of at most 12 characters representing ``x``."""
    x = float(x)
    if x == 0.0:
        return "0"
    if x == int(x) and abs(x) < 1e11:
        return str(int(x))
    text = repr(x)
    if len(text) <= 12:
        return text
    for digits in range(12, 0, -1):
        text = f"{x:.{digits}g}"
        if len(text) <= 12:
            return text
    raise ValueError(f"cannot fit {x!r} in 12 characters")


def _line(code: str, f2: str, f3: str = "", f4: str = "", f5: str = "", f6: str = "") -> str:
    return f" {code:<2} {f2:<8}  {f3:<8}  {f4:>12}   {f5:<8}  {f6:>12}".rstrip()


def export_mps(model: ModelIR) -> str:
    out = [
        "* rvppbid fixed-format MPS export",
        "* objective negated: the model maximises f(x), this file minimises -f(x)",
        f"* columns {model.n_vars}, rows {model.n_constraints}",
        f"NAME          {model.name[:8].upper() or 'MODEL'}",
        "ROWS",
        f" N  {OBJ_ROW}",
    ]
    for i, c in enumerate(model.constraints):
        out.append(f" {_SENSE_CODE[c.sense]}  {row_name(i)}")
    out.append("COLUMNS")
    by_col: list[list[tuple[str, float]]] = [[] for _ in model.variables]
    for j, cval in model.objective.items():
        if cval != 0.0:
            by_col[j].append((OBJ_ROW, -cval))
    for i, c in enumerate(model.constraints):
        for j, a in c.coeffs.items():
            if a != 0.0:
                by_col[j].append((row_name(i), a))
    in_int = False
    marker = 0
    for j, var in enumerate(model.variables):
        is_int = var.kind == BINARY
        if is_int and not in_int:
            out.append(_line("", f"M{marker:07d}", "'MARKER'", "", "'INTORG'"))
            marker += 1
            in_int = True
        elif not is_int and in_int:
            out.append(_line("", f"M{marker:07d}", "'MARKER'", "", "'INTEND'"))
            marker += 1
            in_int = False
        entries = by_col[j] or [(OBJ_ROW, 0.0)]
        name = col_name(j)
        for k in range(0, len(entries), 2):
            pair = entries[k:k + 2]
            if len(pair) == 2:
                out.append(_line("", name, pair[0][0], fmt_number(pair[0][1]), pair[1][0], fmt_number(pair[1][1])))
            else:
                out.append(_line("", name, pair[0][0], fmt_number(pair[0][1])))
    if in_int:
        out.append(_line("", f"M{marker:07d}", "'MARKER'", "", "'INTEND'"))
    out.append("RHS")
    rhs = []
    if model.objective_constant:
        # offset convention: objective constant = -RHS of the objective row
        rhs.append((OBJ_ROW, model.objective_constant))
    rhs += [(row_name(i), c.rhs) for i, c in enumerate(model.constraints) if c.rhs != 0.0]
    for k in range(0, len(rhs), 2):
        pair = rhs[k:k + 2]
        fields = [RHS_SET, pair[0][0], fmt_number(pair[0][1])]
        if len(pair) == 2:
            fields += [pair[1][0], fmt_number(pair[1][1])]
        out.append(_line("", *fields))
    out.append("RANGES")
    out.append("BOUNDS")
    for j, var in enumerate(model.variables):
        name = col_name(j)
        lo, hi = var.lower, var.upper
        if var.kind == BINARY and lo == 0.0 and hi == 1.0:
            out.append(_line("BV", BOUND_SET, name))
            continue
        if lo == hi:
            out.append(_line("FX", BOUND_SET, name, fmt_number(lo)))
            continue
        if lo == -math.inf and hi == math.inf:
            out.append(_line("FR", BOUND_SET, name))
            continue
        if lo == -math.inf:
            out.append(_line("MI", BOUND_SET, name))
        elif lo != 0.0:
            out.append(_line("LO", BOUND_SET, name, fmt_number(lo)))
        if hi != math.inf:
            out.append(_line("UP", BOUND_SET, name, fmt_number(hi)))
    out.append("ENDATA")
    return "\n".join(out) + "\n"
