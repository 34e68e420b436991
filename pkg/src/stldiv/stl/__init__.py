"""Signal temporal logic: syntax, normalization and monitoring."""
from .formula import (
    FALSE,
    TRUE,
    UNBOUNDED,
    AffineAtom,
    And,
    Atom,
    FalseF,
    Formula,
    Implies,
    Interval,
    NegAtom,
    Not,
    Or,
    Release,
    SubformulaTable,
    TrueF,
    Until,
    always,
    atoms_of,
    eventually,
    is_nnf,
    subformulas,
    temporal_depth,
    tighten,
    to_nnf,
    variables_of,
)
from .monitor import NEG_INF, POS_INF, eval_boolean, eval_robust, falsifying_time
from .parser import ParseError, parse, parse_raw

__all__ = [name for name in dir() if not name.startswith("_")]
