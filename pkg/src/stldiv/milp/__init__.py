"""MILP modelling, solving and LP export."""
from __future__ import annotations

from .bnb import branch_and_bound
from .lpformat import export_lp
from .model import (
    BINARY,
    EQ,
    GE,
    LE,
    REAL,
    LinConstraint,
    LinExpr,
    MilpModel,
    MilpVar,
    Solution,
    SolverParams,
    Status,
    linearize_abs,
    sum_expr,
)

ENGINES = ("auto", "simplex", "highs")
# the dense tableau grows quadratically; past this size use HiGHS
AUTO_SIMPLEX_LIMIT = 150


def solve(model: MilpModel, params: SolverParams | None = None, engine: str = "auto") -> Solution:
    """Solve ``model`` (maximization) with the chosen engine.

    ``simplex`` is the built-in branch-and-bound; ``highs`` uses the HiGHS
    library single-threaded; ``auto`` picks the built-in solver for small
    models and HiGHS otherwise.
    """
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; choose from {ENGINES}")
    if engine == "auto":
        engine = "simplex" if model.num_vars + len(model.constraints) <= AUTO_SIMPLEX_LIMIT else "highs"
    if engine == "simplex":
        return branch_and_bound(model, params)
    from .highs import solve_highs

    return solve_highs(model, params)


__all__ = [
    "BINARY", "EQ", "GE", "LE", "REAL", "ENGINES", "LinConstraint", "LinExpr", "MilpModel",
    "MilpVar", "Solution", "SolverParams", "Status", "branch_and_bound", "export_lp",
    "linearize_abs", "solve", "sum_expr",
]
