"""Random small MILPs and an exhaustive-enumeration oracle."""
from __future__ import annotations

import itertools

import numpy as np
import highspy

from stldiv.milp import MilpModel, Status, linearize_abs


def random_model(rng: np.random.Generator, max_bin: int = 12, max_real: int = 8, with_abs: bool = False):
    m = MilpModel("rand")
    nb = int(rng.integers(1, max_bin + 1))
    nr = int(rng.integers(0, max_real + 1))
    bins = [m.add_binary(f"b{i}") for i in range(nb)]
    reals = []
    for i in range(nr):
        lo = float(rng.integers(-5, 3))
        reals.append(m.add_real(f"x{i}", lo, lo + float(rng.integers(1, 8))))
    allv = bins + reals
    abs_z = []
    if with_abs and reals:
        y = sum(float(rng.integers(-2, 3)) * v for v in reals[:3]) + float(rng.integers(-2, 3))
        abs_z.append((linearize_abs(m, y, name="a0"), y))
    for r in range(int(rng.integers(1, 8))):
        k = int(rng.integers(1, min(5, len(allv)) + 1))
        idx = rng.choice(len(allv), size=k, replace=False)
        expr = sum(float(rng.choice([-4, -3, -2, -1, 1, 2, 3, 4])) * allv[i] for i in sorted(idx))
        sense = ["<=", ">=", "=="][int(rng.choice(3, p=[0.6, 0.3, 0.1]))]
        m.add_constraint(expr, sense, float(rng.integers(-3, 8)), tag=f"r{r}")
    obj = sum(float(rng.integers(-5, 6)) * v for v in allv)
    for z, _ in abs_z:
        obj = obj + float(rng.choice([-3.0, -1.0, 2.0])) * z
    m.set_objective(obj)
    return m, abs_z


def enumerate_optimum(model: MilpModel):
    """(status, optimum) by trying every binary assignment with an LP over the rest.

    The leaf LPs are solved by HiGHS (independent of the built-in simplex),
    re-using one LP object and only moving the binary column bounds.
    """
    c, c0, A_ub, b_ub, A_eq, b_eq, lb, ub, is_bin = model.to_arrays()
    n = c.size
    bi = np.flatnonzero(is_bin)
    A = np.vstack([A_ub, A_eq])
    inf = highspy.kHighsInf
    row_lo = np.concatenate([np.full(len(b_ub), -inf), b_eq])
    row_hi = np.concatenate([b_ub, b_eq])
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("presolve", "off")
    lp = highspy.HighsLp()
    lp.num_col_, lp.num_row_ = n, A.shape[0]
    lp.col_cost_ = -c
    lp.col_lower_, lp.col_upper_ = lb, ub
    lp.row_lower_, lp.row_upper_ = row_lo, row_hi
    lp.a_matrix_.format_ = highspy.MatrixFormat.kRowwise
    lp.a_matrix_.start_ = np.arange(0, A.size + 1, n, dtype=np.int32) if A.shape[0] else np.zeros(1, np.int32)
    lp.a_matrix_.index_ = np.tile(np.arange(n, dtype=np.int32), A.shape[0])
    lp.a_matrix_.value_ = A.ravel()
    h.passModel(lp)
    best = None
    for bits in itertools.product((0.0, 1.0), repeat=len(bi)):
        xb = np.array(bits)
        if np.any(xb < lb[bi]) or np.any(xb > ub[bi]):
            continue
        h.changeColsBounds(len(bi), bi.astype(np.int32), xb, xb)
        h.run()
        if h.getModelStatus() != highspy.HighsModelStatus.kOptimal:
            continue
        x = np.array(h.getSolution().col_value)
        # independent acceptance check of the leaf point
        if np.any(A_ub @ x > b_ub + 1e-7) or np.any(np.abs(A_eq @ x - b_eq) > 1e-7):
            continue
        val = float(c @ x)
        if best is None or val > best:
            best = val
    if best is None:
        return Status.INFEASIBLE, None
    return Status.OPTIMAL, best + c0
