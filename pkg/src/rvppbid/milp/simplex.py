"""Bounded-variable primal simplex.

Solves ``min c@x  s.t.  row_lo <= A@x <= row_hi,  lo <= x <= hi`` with a
revised simplex over the logical form ``A@x - s = 0`` (one logical ``s_i``
per row, bounded by the row limits). Phase I adds one artificial per row
whose crash value falls outside its row limits.

Pricing is Dantzig's largest reduced cost. After ``DEGENERATE_SWITCH``
consecutive degenerate pivots the loop falls back to Bland's smallest-index
rule until the objective strictly improves again, which rules out cycling:
the objective never increases, so a vertex left by a nondegenerate step is
never revisited, and Bland terminates at each degenerate vertex.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from numba import njit

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-6
OPT_TOL = 1e-9
DEGENERATE_SWITCH = 50
REFACTOR_EVERY = 300

STATUS_OPTIMAL = 0
STATUS_INFEASIBLE = 1
STATUS_UNBOUNDED = 2
STATUS_ITERLIMIT = 3

_BASIC, _LOWER, _UPPER, _FREE = 0, 1, 2, 3


@dataclass
class LPResult:
    status: int
    x: np.ndarray
    objective: float
    iterations: int
    phase1_infeasibility: float

    @property
    def status_name(self) -> str:
        return ("optimal", "infeasible", "unbounded", "iteration-limit")[self.status]


@njit(cache=True)
def _column_dot(j, n, m, y, indptr, indices, data):
    # y^T a_j for the implicit [A | -I | diag(sigma)] column j
    if j < n:
        acc = 0.0
        for k in range(indptr[j], indptr[j + 1]):
            acc += y[indices[k]] * data[k]
        return acc
    if j < n + m:
        return -y[j - n]
    return 0.0  # artificial handled by caller (needs sigma)


@njit(cache=True)
def _column_into(j, n, m, sigma, indptr, indices, data, Binv, out):
    # out = Binv @ a_j
    mm = Binv.shape[0]
    for i in range(mm):
        out[i] = 0.0
    if j < n:
        k0, k1 = indptr[j], indptr[j + 1]
        for i in range(mm):
            acc = 0.0
            for k in range(k0, k1):
                acc += Binv[i, indices[k]] * data[k]
            out[i] = acc
    elif j < n + m:
        r = j - n
        for i in range(mm):
            out[i] = -Binv[i, r]
    else:
        r = j - n - m
        s = sigma[r]
        for i in range(mm):
            out[i] = s * Binv[i, r]


@njit(cache=True)
def _refactor(basis, n, m, sigma, indptr, indices, data, Binv, xval, status, xB):
    B = np.zeros((m, m))
    for i in range(m):
        j = basis[i]
        if j < n:
            for k in range(indptr[j], indptr[j + 1]):
                B[indices[k], i] = data[k]
        elif j < n + m:
            B[j - n, i] = -1.0
        else:
            B[j - n - m, i] = sigma[j - n - m]
    Binv[:, :] = np.linalg.inv(B)
    # rhs = -sum_{nonbasic} a_j x_j
    rhs = np.zeros(m)
    ntot = n + 2 * m
    for j in range(ntot):
        if status[j] == _BASIC:
            continue
        xv = xval[j]
        if xv == 0.0:
            continue
        if j < n:
            for k in range(indptr[j], indptr[j + 1]):
                rhs[indices[k]] -= data[k] * xv
        elif j < n + m:
            rhs[j - n] += xv
        else:
            rhs[j - n - m] -= sigma[j - n - m] * xv
    for i in range(m):
        acc = 0.0
        for k in range(m):
            acc += Binv[i, k] * rhs[k]
        xB[i] = acc
        xval[basis[i]] = acc


@njit(cache=True)
def _run_phase(cost, n, m, sigma, indptr, indices, data, L, U, basis, status, xval,
               Binv, max_iter, it0):
    ntot = n + 2 * m
    xB = np.empty(m)
    for i in range(m):
        xB[i] = xval[basis[i]]
    y = np.empty(m)
    alpha = np.empty(m)
    it = it0
    degenerate_run = 0
    bland = False
    since_refactor = 0
    fresh_duals = True
    d_q = 0.0
    while True:
        if it >= max_iter:
            return STATUS_ITERLIMIT, it
        if since_refactor >= REFACTOR_EVERY or fresh_duals:
            if since_refactor >= REFACTOR_EVERY:
                _refactor(basis, n, m, sigma, indptr, indices, data, Binv, xval, status, xB)
                since_refactor = 0
            # duals y = c_B B^-1, accumulated row by row; updated per pivot below
            for k in range(m):
                y[k] = 0.0
            for i in range(m):
                cb = cost[basis[i]]
                if cb != 0.0:
                    for k in range(m):
                        y[k] += cb * Binv[i, k]
            fresh_duals = False
        # pricing
        q = -1
        qdir = 0
        best = 0.0
        for j in range(ntot):
            st = status[j]
            if st == _BASIC:
                continue
            if L[j] == U[j]:
                continue
            if j < n + m:
                d = cost[j] - _column_dot(j, n, m, y, indptr, indices, data)
            else:
                d = cost[j] - sigma[j - n - m] * y[j - n - m]
            direction = 0
            if st == _LOWER:
                if d < -OPT_TOL:
                    direction = 1
            elif st == _UPPER:
                if d > OPT_TOL:
                    direction = -1
            else:
                if d < -OPT_TOL:
                    direction = 1
                elif d > OPT_TOL:
                    direction = -1
            if direction == 0:
                continue
            if bland:
                q = j
                qdir = direction
                d_q = d
                break
            if abs(d) > best:
                best = abs(d)
                q = j
                qdir = direction
                d_q = d
        if q < 0:
            return STATUS_OPTIMAL, it
        _column_into(q, n, m, sigma, indptr, indices, data, Binv, alpha)
        # ratio test
        theta = np.inf
        r = -1
        r_to_upper = False
        best_piv = 0.0
        for i in range(m):
            a = alpha[i] * qdir
            bi = basis[i]
            if a > PIVOT_TOL:
                if L[bi] == -np.inf:
                    continue
                lim = (xB[i] - L[bi]) / a
                to_upper = False
            elif a < -PIVOT_TOL:
                if U[bi] == np.inf:
                    continue
                lim = (U[bi] - xB[i]) / (-a)
                to_upper = True
            else:
                continue
            if lim < 0.0:
                lim = 0.0
            take = False
            if lim < theta - 1e-12:
                take = True
            elif lim <= theta + 1e-12 and r >= 0:
                if bland:
                    take = bi < basis[r]
                else:
                    take = abs(a) > best_piv
            if take:
                theta = lim
                r = i
                r_to_upper = to_upper
                best_piv = abs(a)
        span = U[q] - L[q]
        if span <= theta:
            theta = span
            r = -1
        if theta == np.inf:
            return STATUS_UNBOUNDED, it
        step = qdir * theta
        if theta > 1e-12:
            for i in range(m):
                xB[i] -= step * alpha[i]
                xval[basis[i]] = xB[i]
            degenerate_run = 0
            bland = False
        else:
            degenerate_run += 1
            if degenerate_run >= DEGENERATE_SWITCH:
                bland = True
        xval[q] += step
        if r < 0:
            # bound flip
            if qdir > 0:
                status[q] = _UPPER
                xval[q] = U[q]
            else:
                status[q] = _LOWER
                xval[q] = L[q]
        else:
            leaving = basis[r]
            if r_to_upper:
                status[leaving] = _UPPER
                xval[leaving] = U[leaving]
            else:
                status[leaving] = _LOWER
                xval[leaving] = L[leaving]
            status[q] = _BASIC
            basis[r] = q
            xB[r] = xval[q]
            piv = alpha[r]
            for k in range(m):
                Binv[r, k] /= piv
            for i in range(m):
                if i == r:
                    continue
                f = alpha[i]
                if f != 0.0:
                    for k in range(m):
                        Binv[i, k] -= f * Binv[r, k]
            for k in range(m):
                y[k] += d_q * Binv[r, k]
            since_refactor += 1
        it += 1


@njit(cache=True)
def _solve(c, n, m, indptr, indices, data, lo, hi, row_lo, row_hi, max_iter):
    ntot = n + 2 * m
    L = np.empty(ntot)
    U = np.empty(ntot)
    xval = np.zeros(ntot)
    status = np.empty(ntot, dtype=np.int64)
    sigma = np.ones(m)
    for j in range(n):
        L[j] = lo[j]
        U[j] = hi[j]
        if lo[j] > -np.inf:
            xval[j] = lo[j]
            status[j] = _LOWER
        elif hi[j] < np.inf:
            xval[j] = hi[j]
            status[j] = _UPPER
        else:
            xval[j] = 0.0
            status[j] = _FREE
    act = np.zeros(m)
    for j in range(n):
        xv = xval[j]
        if xv != 0.0:
            for k in range(indptr[j], indptr[j + 1]):
                act[indices[k]] += data[k] * xv
    basis = np.empty(m, dtype=np.int64)
    Binv = np.zeros((m, m))
    cost = np.zeros(ntot)
    need_phase1 = False
    for i in range(m):
        js = n + i
        ja = n + m + i
        L[js] = row_lo[i]
        U[js] = row_hi[i]
        L[ja] = 0.0
        U[ja] = 0.0
        status[ja] = _LOWER
        if row_lo[i] - FEAS_TOL * 1e-3 <= act[i] <= row_hi[i] + FEAS_TOL * 1e-3:
            basis[i] = js
            status[js] = _BASIC
            xval[js] = act[i]
            Binv[i, i] = -1.0
        else:
            if act[i] < row_lo[i]:
                s = row_lo[i]
                status[js] = _LOWER if row_lo[i] > -np.inf else _FREE
            else:
                s = row_hi[i]
                status[js] = _UPPER
            if row_lo[i] == row_hi[i]:
                status[js] = _LOWER
            xval[js] = s
            resid = act[i] - s
            sigma[i] = -1.0 if resid > 0 else 1.0
            U[ja] = np.inf
            xval[ja] = abs(resid)
            basis[i] = ja
            status[ja] = _BASIC
            Binv[i, i] = sigma[i]
            cost[ja] = 1.0
            need_phase1 = True
    it = 0
    infeas = 0.0
    if need_phase1:
        st, it = _run_phase(cost, n, m, sigma, indptr, indices, data, L, U, basis,
                            status, xval, Binv, max_iter, 0)
        xB = np.empty(m)
        _refactor(basis, n, m, sigma, indptr, indices, data, Binv, xval, status, xB)
        for i in range(m):
            infeas += xval[n + m + i]
        if st == STATUS_ITERLIMIT:
            return st, xval, it, infeas
        scale = 1.0
        for i in range(m):
            a = abs(act[i])
            if a > scale:
                scale = a
        if infeas > FEAS_TOL * scale:
            return STATUS_INFEASIBLE, xval, it, infeas
        for i in range(m):
            ja = n + m + i
            U[ja] = 0.0
            if status[ja] != _BASIC:
                xval[ja] = 0.0
                status[ja] = _LOWER
    for j in range(ntot):
        cost[j] = 0.0
    for j in range(n):
        cost[j] = c[j]
    st, it = _run_phase(cost, n, m, sigma, indptr, indices, data, L, U, basis,
                        status, xval, Binv, max_iter, it)
    xB = np.empty(m)
    _refactor(basis, n, m, sigma, indptr, indices, data, Binv, xval, status, xB)
    return st, xval, it, infeas


def solve_lp(c, A, row_lo, row_hi, lo, hi, max_iter: int = 200_000) -> LPResult:
    """Minimise ``c @ x`` over a row-bounded, column-bounded polyhedron.

    ``A`` may be any scipy sparse matrix or dense array of shape (m, n).
    """
    c = np.ascontiguousarray(c, dtype=float)
    n = c.shape[0]
    A = sp.csc_matrix(A, dtype=float)
    m = A.shape[0]
    if A.shape[1] != n:
        raise ValueError("A column count must match len(c)")
    lo = np.ascontiguousarray(lo, dtype=float)
    hi = np.ascontiguousarray(hi, dtype=float)
    if np.any(lo > hi):
        return LPResult(STATUS_INFEASIBLE, np.clip(np.zeros(n), lo, hi), np.nan, 0, np.inf)
    row_lo = np.ascontiguousarray(row_lo, dtype=float)
    row_hi = np.ascontiguousarray(row_hi, dtype=float)
    if np.any(row_lo > row_hi):
        return LPResult(STATUS_INFEASIBLE, np.clip(np.zeros(n), lo, hi), np.nan, 0, np.inf)
    if m == 0:
        x = np.where(c > 0, lo, np.where(c < 0, hi, np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi, 0.0))))
        if not np.all(np.isfinite(x)):
            return LPResult(STATUS_UNBOUNDED, np.nan_to_num(x), -np.inf, 0, 0.0)
        return LPResult(STATUS_OPTIMAL, x, float(c @ x), 0, 0.0)
    A.sort_indices()
    st, xval, it, infeas = _solve(
        c, n, m,
        A.indptr.astype(np.int64), A.indices.astype(np.int64), A.data,
        lo, hi, row_lo, row_hi, max_iter,
    )
    x = xval[:n].copy()
    obj = float(c @ x) if st == STATUS_OPTIMAL else np.nan
    return LPResult(int(st), x, obj, int(it), float(infeas))
