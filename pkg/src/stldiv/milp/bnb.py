"""Best-bound branch-and-bound over the dense simplex LP core.

Nodes are tightened copies of the binary bounds. The open node with the
largest parent LP bound is expanded first (ties by creation order), the
most fractional binary is branched on (ties by lowest index) and nothing
is randomized, so a fixed model always produces the same search.
"""
from __future__ import annotations

import heapq
import time

import numpy as np

from . import simplex
from .model import MilpModel, Solution, SolverParams, Status


def _fix_and_polish(arrays, lb, ub, x, bin_idx):
    """Re-solve the LP with binaries pinned to their rounded values."""
    c, _, A_ub, b_ub, A_eq, b_eq = arrays
    lb2, ub2 = lb.copy(), ub.copy()
    r = np.round(x[bin_idx])
    lb2[bin_idx] = r
    ub2[bin_idx] = r
    res = simplex.solve_lp(c, A_ub, b_ub, A_eq, b_eq, lb2, ub2)
    if res.status != simplex.OPTIMAL:
        return None
    out = res.x.copy()
    out[bin_idx] = r
    return out


def branch_and_bound(model: MilpModel, params: SolverParams | None = None) -> Solution:
    params = params or model.params
    start = time.monotonic()
    deadline = start + params.timeout
    c, c0, A_ub, b_ub, A_eq, b_eq, lb, ub, is_bin = model.to_arrays()
    arrays = (c, c0, A_ub, b_ub, A_eq, b_eq)
    bin_idx = np.flatnonzero(is_bin)

    best_x, best_obj = None, -np.inf
    incumbents = []
    nodes = 0
    seq = 0
    heap = [(-np.inf, seq, lb.copy(), ub.copy())]  # key: -parent bound
    timed_out = False
    unbounded = False

    def gap_ok(bound):
        if best_x is None:
            return False
        tol = max(params.mip_abs_gap, params.mip_rel_gap * abs(best_obj))
        return bound <= best_obj + tol

    while heap:
        if time.monotonic() > deadline:
            timed_out = True
            break
        neg_bound, _, nlb, nub = heapq.heappop(heap)
        if gap_ok(-neg_bound):
            break  # best-bound order: every remaining node is dominated
        nodes += 1
        res = simplex.solve_lp(c, A_ub, b_ub, A_eq, b_eq, nlb, nub)
        if res.status == simplex.INFEASIBLE:
            continue
        if res.status == simplex.UNBOUNDED:
            unbounded = True
            break
        if res.status != simplex.OPTIMAL:
            raise RuntimeError(f"LP relaxation failed: {res.status}")
        if gap_ok(res.objective):
            continue
        xb = res.x[bin_idx]
        frac = np.abs(xb - np.round(xb))
        if bin_idx.size == 0 or frac.max() <= params.int_tol:
            x = _fix_and_polish(arrays, nlb, nub, res.x, bin_idx) if bin_idx.size else res.x
            if x is None:
                continue
            obj = float(c @ x)
            if obj > best_obj:
                best_x, best_obj = x, obj
                incumbents.append((time.monotonic() - start, obj + c0))
            continue
        k = int(bin_idx[np.argmax(frac)])  # argmax returns the lowest index on ties
        for val in (1.0, 0.0):
            clb, cub = nlb.copy(), nub.copy()
            clb[k] = cub[k] = val
            seq += 1
            heapq.heappush(heap, (-res.objective, seq, clb, cub))

    wall = time.monotonic() - start
    if unbounded:
        return Solution(Status.UNBOUNDED, nodes=nodes, wall_time=wall)
    if best_x is None:
        st = Status.TIMEOUT if timed_out else Status.INFEASIBLE
        return Solution(st, nodes=nodes, wall_time=wall, incumbents=incumbents)
    st = Status.FEASIBLE if timed_out else Status.OPTIMAL
    return Solution(st, best_x, float(best_obj + c0), nodes, wall, incumbents)
