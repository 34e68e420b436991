"""Dense bounded-variable primal simplex (two phases) for small LPs.

Solves ``max c.x  s.t.  A_ub x <= b_ub, A_eq x = b_eq, lb <= x <= ub`` with
finite ``lb``/``ub``. Dantzig pricing is used until a run of degenerate
pivots is seen, after which Bland's rule takes over for the rest of the
solve so cycling cannot occur.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

OPTIMAL, INFEASIBLE, UNBOUNDED, ITERATION_LIMIT = "optimal", "infeasible", "unbounded", "iteration_limit"

_PIVOT_TOL = 1e-9
_COST_TOL = 1e-9
_DEGENERATE_RUN = 30


@dataclass
class LPResult:
    status: str
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None
    iterations: int = 0


class _Tableau:
    def __init__(self, A, b, lower, upper, n_art):
        self.m, ncols = A.shape
        self.L = lower
        self.U = upper
        self.n_art = n_art
        self.x = lower.copy()
        self.at_upper = np.zeros(ncols, dtype=bool)
        self.A = A
        self.b = b
        self.tab = None
        self.basis = None
        self.bland = False
        self.iterations = 0

    def refresh_basic(self, binv):
        nonbasic = np.ones(len(self.x), dtype=bool)
        nonbasic[self.basis] = False
        xn = np.where(nonbasic, self.x, 0.0)
        self.x[self.basis] = binv @ (self.b - self.A @ xn)

    def run(self, cost, allowed, max_iter):
        m = self.m
        degenerate = 0
        while True:
            if self.iterations >= max_iter:
                return ITERATION_LIMIT
            self.iterations += 1
            d = cost - cost[self.basis] @ self.tab
            d[self.basis] = 0.0
            can_up = allowed & ~self.at_upper & (d > _COST_TOL) & (self.U > self.L)
            can_dn = allowed & self.at_upper & (d < -_COST_TOL)
            cand = np.flatnonzero(can_up | can_dn)
            if cand.size == 0:
                return OPTIMAL
            if self.bland:
                j = int(cand[0])
            else:
                j = int(cand[np.argmax(np.abs(d[cand]))])
            dirn = 1.0 if d[j] > 0 else -1.0
            alpha = self.tab[:, j] * dirn
            xb = self.x[self.basis]
            lb, ub = self.L[self.basis], self.U[self.basis]
            ratios = np.full(m, np.inf)
            dec = alpha > _PIVOT_TOL
            inc = alpha < -_PIVOT_TOL
            ratios[dec] = (xb[dec] - lb[dec]) / alpha[dec]
            inc_fin = inc & np.isfinite(ub)
            ratios[inc_fin] = (ub[inc_fin] - xb[inc_fin]) / -alpha[inc_fin]
            ratios = np.maximum(ratios, 0.0)
            t_flip = self.U[j] - self.L[j]
            t_row = ratios.min() if m else np.inf
            if t_flip <= t_row:
                if not np.isfinite(t_flip):
                    return UNBOUNDED
                self.x[self.basis] = xb - t_flip * alpha
                self.at_upper[j] = not self.at_upper[j]
                self.x[j] = self.U[j] if self.at_upper[j] else self.L[j]
                degenerate = 0
                continue
            if not np.isfinite(t_row):
                return UNBOUNDED
            ties = np.flatnonzero(ratios <= t_row + 1e-12)
            if self.bland:
                r = int(ties[np.argmin(self.basis[ties])])
            else:
                r = int(ties[np.argmax(np.abs(alpha[ties]))])
            leaving = self.basis[r]
            self.x[self.basis] = xb - t_row * alpha
            entering_val = self.x[j] + dirn * t_row
            if alpha[r] > 0:
                self.x[leaving] = self.L[leaving]
                self.at_upper[leaving] = False
            else:
                self.x[leaving] = self.U[leaving]
                self.at_upper[leaving] = True
            self.pivot(r, j)
            self.x[j] = entering_val
            self.at_upper[j] = False
            if t_row <= 1e-12:
                degenerate += 1
                if degenerate >= _DEGENERATE_RUN:
                    self.bland = True
            else:
                degenerate = 0

    def pivot(self, r, j):
        tab = self.tab
        piv = tab[r, j]
        tab[r] /= piv
        col = tab[:, j].copy()
        col[r] = 0.0
        tab -= np.outer(col, tab[r])
        self.basis[r] = j


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, lb=None, ub=None,
             max_iter: int = 50_000, feas_tol: float = 1e-7) -> LPResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    lb = np.zeros(n) if lb is None else np.asarray(lb, dtype=float)
    ub = np.full(n, np.inf) if ub is None else np.asarray(ub, dtype=float)
    if np.any(lb > ub + 1e-12):
        return LPResult(INFEASIBLE)
    if not np.all(np.isfinite(lb)):
        raise ValueError("lower bounds must be finite")
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq
    # columns: structural | slacks (<= rows) | artificials
    A = np.zeros((m, n + m_ub))
    A[:m_ub, :n] = A_ub
    A[:m_ub, n:] = np.eye(m_ub)
    A[m_ub:, :n] = A_eq
    b = np.concatenate([b_ub, b_eq])
    lower = np.concatenate([lb, np.zeros(m_ub)])
    upper = np.concatenate([ub, np.full(m_ub, np.inf)])

    resid = b - A @ lower
    sgn = np.where(resid >= 0, 1.0, -1.0)
    A_full = np.hstack([A, np.diag(sgn)])
    lower_full = np.concatenate([lower, np.zeros(m)])
    upper_full = np.concatenate([upper, np.full(m, np.inf)])
    tb = _Tableau(A_full, b, lower_full, upper_full, m)
    ncols = A_full.shape[1]
    art = np.arange(n + m_ub, ncols)
    tb.basis = art.copy()
    tb.tab = sgn[:, None] * A_full
    tb.x[art] = np.abs(resid)

    # phase I
    cost1 = np.zeros(ncols)
    cost1[art] = -1.0
    allowed = np.ones(ncols, dtype=bool)
    st = tb.run(cost1, allowed, max_iter)
    if st == ITERATION_LIMIT:
        return LPResult(ITERATION_LIMIT, iterations=tb.iterations)
    scale = max(1.0, float(np.max(np.abs(b))) if m else 1.0)
    if tb.x[art].sum() > feas_tol * scale:
        return LPResult(INFEASIBLE, iterations=tb.iterations)

    # drive zero-valued artificials out of the basis where possible
    for r in range(m):
        if tb.basis[r] >= n + m_ub:
            row = tb.tab[r, : n + m_ub]
            nz = np.flatnonzero(np.abs(row) > 1e-7)
            if nz.size:
                k = int(nz[np.argmax(np.abs(row[nz]))])
                val = tb.x[k]
                tb.x[tb.basis[r]] = 0.0
                tb.pivot(r, k)
                tb.x[k] = val
                tb.at_upper[k] = False
    tb.U[art] = 0.0
    tb.x[art] = np.where(np.isin(art, tb.basis), tb.x[art], 0.0)
    allowed[art] = False
    binv = tb.tab[:, art] * sgn[None, :]
    tb.refresh_basic(binv)

    cost2 = np.zeros(ncols)
    cost2[:n] = c
    st = tb.run(cost2, allowed, max_iter)
    if st != OPTIMAL:
        return LPResult(st, iterations=tb.iterations)
    binv = tb.tab[:, art] * sgn[None, :]
    tb.refresh_basic(binv)
    x = np.clip(tb.x[:n], lb, ub)
    return LPResult(OPTIMAL, x, float(c @ x), tb.iterations)
