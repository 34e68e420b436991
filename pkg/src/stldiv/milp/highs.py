"""HiGHS backend for models beyond the reach of the dense simplex."""
from __future__ import annotations

import time

import highspy
import numpy as np

from .model import EQ, GE, LE, MilpModel, Solution, SolverParams, Status


def _build_lp(model: MilpModel) -> highspy.HighsLp:
    inf = highspy.kHighsInf
    lp = highspy.HighsLp()
    n = model.num_vars
    lp.num_col_ = n
    lp.num_row_ = len(model.constraints)
    cost = np.zeros(n)
    for k, v in model.objective.terms.items():
        cost[k] += v
    lp.col_cost_ = cost
    lp.col_lower_ = np.array([v.lower for v in model.vars], dtype=float)
    lp.col_upper_ = np.array([v.upper for v in model.vars], dtype=float)
    lp.offset_ = model.objective.const
    lp.sense_ = highspy.ObjSense.kMaximize
    lo, hi, starts, index, value = [], [], [0], [], []
    for con in model.constraints:
        lo.append(con.rhs if con.sense in (GE, EQ) else -inf)
        hi.append(con.rhs if con.sense in (LE, EQ) else inf)
        for k, c in con.terms:
            index.append(k)
            value.append(c)
        starts.append(len(index))
    lp.row_lower_ = np.array(lo, dtype=float)
    lp.row_upper_ = np.array(hi, dtype=float)
    lp.a_matrix_.format_ = highspy.MatrixFormat.kRowwise
    lp.a_matrix_.start_ = np.array(starts, dtype=np.int32)
    lp.a_matrix_.index_ = np.array(index, dtype=np.int32)
    lp.a_matrix_.value_ = np.array(value, dtype=float)
    lp.integrality_ = [
        highspy.HighsVarType.kInteger if v.is_binary else highspy.HighsVarType.kContinuous
        for v in model.vars
    ]
    return lp


def _polish(model: MilpModel, x, bins, params):
    """Re-solve the continuous part with binaries pinned to their rounded values."""
    lp = _build_lp(model)
    lower, upper = np.array(lp.col_lower_), np.array(lp.col_upper_)
    lower[bins] = upper[bins] = x[bins]
    lp.col_lower_, lp.col_upper_ = lower, upper
    lp.integrality_ = [highspy.HighsVarType.kContinuous] * model.num_vars
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("threads", 1)
    h.setOptionValue("primal_feasibility_tolerance", min(1e-9, params.feas_tol))
    h.passModel(lp)
    h.run()
    if h.getModelStatus() != highspy.HighsModelStatus.kOptimal:
        return x
    y = np.array(h.getSolution().col_value, dtype=float)
    y[bins] = x[bins]
    return y


def solve_highs(model: MilpModel, params: SolverParams | None = None) -> Solution:
    params = params or model.params
    start = time.monotonic()
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("threads", 1)
    h.setOptionValue("random_seed", 0)
    h.setOptionValue("time_limit", float(params.timeout))
    h.setOptionValue("mip_abs_gap", float(params.mip_abs_gap))
    h.setOptionValue("mip_rel_gap", float(params.mip_rel_gap))
    h.setOptionValue("mip_feasibility_tolerance", min(1e-7, params.feas_tol))
    h.setOptionValue("primal_feasibility_tolerance", min(1e-7, params.feas_tol))
    h.passModel(_build_lp(model))
    h.run()
    wall = time.monotonic() - start
    ms = h.getModelStatus()
    info = h.getInfo()
    has_sol = info.primal_solution_status == 2  # kSolutionStatusFeasible
    nodes = int(getattr(info, "mip_node_count", 0) or 0)
    S = highspy.HighsModelStatus
    if ms == S.kInfeasible:
        return Solution(Status.INFEASIBLE, nodes=nodes, wall_time=wall)
    if ms in (S.kUnbounded, S.kUnboundedOrInfeasible) and not has_sol:
        return Solution(Status.UNBOUNDED if ms == S.kUnbounded else Status.INFEASIBLE,
                        nodes=nodes, wall_time=wall)
    if not has_sol:
        return Solution(Status.TIMEOUT, nodes=nodes, wall_time=wall)
    x = np.array(h.getSolution().col_value, dtype=float)
    bins = [v.id for v in model.vars if v.is_binary]
    x[bins] = np.round(x[bins])
    if model.max_violation(x) > params.feas_tol:
        x = _polish(model, x, bins, params) if bins else x
    obj = float(model.objective.value(x))
    status = Status.OPTIMAL if ms == S.kOptimal else Status.FEASIBLE
    return Solution(status, x, obj, nodes, wall, [(wall, obj)])
