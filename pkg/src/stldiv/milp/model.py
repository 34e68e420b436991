"""Solver-independent MILP model: variables, affine constraints, objective."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

import numpy as np

REAL = "real"
BINARY = "binary"

LE, EQ, GE = "<=", "==", ">="


class LinExpr:
    """Affine expression ``sum(coef * var) + const`` keyed by variable id."""

    __slots__ = ("terms", "const")

    def __init__(self, terms: Optional[Mapping[int, float]] = None, const: float = 0.0):
        self.terms = dict(terms) if terms else {}
        self.const = float(const)

    @staticmethod
    def of(x) -> "LinExpr":
        if isinstance(x, LinExpr):
            return x
        if isinstance(x, MilpVar):
            return LinExpr({x.id: 1.0})
        return LinExpr(const=float(x))

    def copy(self) -> "LinExpr":
        return LinExpr(self.terms, self.const)

    def add_term(self, var, coef: float) -> "LinExpr":
        vid = var.id if isinstance(var, MilpVar) else int(var)
        if coef:
            self.terms[vid] = self.terms.get(vid, 0.0) + coef
        return self

    def iadd(self, other, scale: float = 1.0) -> "LinExpr":
        other = LinExpr.of(other)
        for k, v in other.terms.items():
            self.terms[k] = self.terms.get(k, 0.0) + scale * v
        self.const += scale * other.const
        return self

    def __add__(self, other):
        return self.copy().iadd(other)

    __radd__ = __add__

    def __sub__(self, other):
        return self.copy().iadd(other, -1.0)

    def __rsub__(self, other):
        return LinExpr.of(other).copy().iadd(self, -1.0)

    def __neg__(self):
        return LinExpr({k: -v for k, v in self.terms.items()}, -self.const)

    def __mul__(self, s):
        if isinstance(s, (LinExpr, MilpVar)):
            raise TypeError("product of expressions is not linear")
        s = float(s)
        return LinExpr({k: v * s for k, v in self.terms.items()}, self.const * s)

    __rmul__ = __mul__

    def value(self, x) -> float:
        return self.const + sum(c * x[k] for k, c in self.terms.items())

    def __repr__(self):
        return f"LinExpr({self.terms}, {self.const})"


@dataclass(frozen=True)
class MilpVar:
    id: int
    kind: str
    lower: float
    upper: float
    name: str

    # arithmetic builds LinExpr
    def __add__(self, o):
        return LinExpr.of(self) + o

    __radd__ = __add__

    def __sub__(self, o):
        return LinExpr.of(self) - o

    def __rsub__(self, o):
        return LinExpr.of(o) - self

    def __neg__(self):
        return -LinExpr.of(self)

    def __mul__(self, s):
        return LinExpr.of(self) * s

    __rmul__ = __mul__

    @property
    def is_binary(self) -> bool:
        return self.kind == BINARY


@dataclass(frozen=True)
class LinConstraint:
    terms: tuple  # ((var id, coefficient), ...) in insertion order
    sense: str
    rhs: float
    tag: str = ""

    def activity(self, x) -> float:
        return sum(c * x[k] for k, c in self.terms)

    def violation(self, x) -> float:
        act = self.activity(x)
        if self.sense == LE:
            return max(0.0, act - self.rhs)
        if self.sense == GE:
            return max(0.0, self.rhs - act)
        return abs(act - self.rhs)


@dataclass
class SolverParams:
    timeout: float = 60.0
    mip_abs_gap: float = 1e-6
    mip_rel_gap: float = 0.0
    feas_tol: float = 1e-6
    int_tol: float = 1e-6


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"  # stopped at the time limit with an incumbent
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    TIMEOUT = "timeout"  # time limit, no incumbent: feasibility undetermined

    @property
    def has_solution(self) -> bool:
        return self in (Status.OPTIMAL, Status.FEASIBLE)


@dataclass
class Solution:
    status: Status
    values: Optional[np.ndarray] = None
    objective: Optional[float] = None
    nodes: int = 0
    wall_time: float = 0.0
    incumbents: list = field(default_factory=list)

    def __getitem__(self, var) -> float:
        if self.values is None:
            raise ValueError(f"no assignment (status {self.status.value})")
        return float(self.values[var.id if isinstance(var, MilpVar) else var])

    def value(self, expr) -> float:
        return LinExpr.of(expr).value(self.values)


class MilpModel:
    """A maximization MILP over bounded real and binary variables."""

    def __init__(self, name: str = "model"):
        self.name = name
        self.vars: list[MilpVar] = []
        self.constraints: list[LinConstraint] = []
        self.objective = LinExpr()
        self.params = SolverParams()
        self._names: dict[str, int] = {}
        self._sealed = False

    # -- construction
    def _check_open(self):
        if self._sealed:
            raise RuntimeError("model is sealed")

    def add_var(self, name: str, lower: float = 0.0, upper: float = 1.0, kind: str = REAL) -> MilpVar:
        self._check_open()
        if name in self._names:
            raise ValueError(f"duplicate variable name {name!r}")
        if kind not in (REAL, BINARY):
            raise ValueError(f"unknown variable kind {kind!r}")
        lower, upper = float(lower), float(upper)
        if kind == BINARY:
            if lower < 0 or upper > 1:
                raise ValueError("binary bounds must lie within [0, 1]")
        if not (math.isfinite(lower) and math.isfinite(upper)):
            raise ValueError(f"variable {name!r} needs finite bounds")
        if lower > upper:
            raise ValueError(f"variable {name!r} has lower > upper")
        v = MilpVar(len(self.vars), kind, lower, upper, name)
        self.vars.append(v)
        self._names[name] = v.id
        return v

    def add_binary(self, name: str) -> MilpVar:
        return self.add_var(name, 0.0, 1.0, BINARY)

    def add_real(self, name: str, lower: float, upper: float) -> MilpVar:
        return self.add_var(name, lower, upper, REAL)

    def var(self, name: str) -> MilpVar:
        return self.vars[self._names[name]]

    def has_var(self, name: str) -> bool:
        return name in self._names

    def fix(self, var: MilpVar, value: float) -> MilpVar:
        """Pin ``var`` to ``value`` by collapsing its bounds."""
        self._check_open()
        value = float(value)
        if not var.lower - 1e-9 <= value <= var.upper + 1e-9:
            raise ValueError(f"cannot fix {var.name!r} outside its bounds")
        value = min(max(value, var.lower), var.upper)
        fixed = MilpVar(var.id, var.kind, value, value, var.name)
        self.vars[var.id] = fixed
        return fixed

    def add_constraint(self, expr, sense: str, rhs=0.0, tag: str = "") -> Optional[LinConstraint]:
        """Add ``expr (sense) rhs``; both sides may be expressions.

        Constraints without variables are checked immediately and dropped
        when satisfied.
        """
        self._check_open()
        if sense not in (LE, EQ, GE):
            raise ValueError(f"unsupported sense {sense!r}; strict inequalities are not allowed")
        e = LinExpr.of(expr) - LinExpr.of(rhs)
        terms = tuple((k, float(c)) for k, c in e.terms.items() if c != 0.0)
        for k, c in terms:
            if not 0 <= k < len(self.vars):
                raise ValueError(f"constraint {tag!r} references undeclared variable {k}")
            if not math.isfinite(c):
                raise ValueError(f"constraint {tag!r} has a non-finite coefficient")
        rhs_val = -e.const
        if not terms:
            ok = {LE: 0 <= rhs_val + 1e-9, GE: 0 >= rhs_val - 1e-9, EQ: abs(rhs_val) <= 1e-9}[sense]
            if not ok:
                raise ValueError(f"constant constraint {tag!r} is infeasible")
            return None
        con = LinConstraint(terms, sense, rhs_val, tag)
        self.constraints.append(con)
        return con

    def le(self, lhs, rhs, tag=""):
        return self.add_constraint(lhs, LE, rhs, tag)

    def ge(self, lhs, rhs, tag=""):
        return self.add_constraint(lhs, GE, rhs, tag)

    def eq(self, lhs, rhs, tag=""):
        return self.add_constraint(lhs, EQ, rhs, tag)

    def set_objective(self, expr) -> None:
        self._check_open()
        e = LinExpr.of(expr)
        for k in e.terms:
            if not 0 <= k < len(self.vars):
                raise ValueError(f"objective references undeclared variable {k}")
        self.objective = e.copy()

    def seal(self) -> "MilpModel":
        self._sealed = True
        return self

    def copy(self) -> "MilpModel":
        m = MilpModel(self.name)
        m.vars = list(self.vars)
        m.constraints = list(self.constraints)
        m.objective = self.objective.copy()
        m.params = SolverParams(**vars(self.params))
        m._names = dict(self._names)
        return m

    # -- queries
    @property
    def num_vars(self) -> int:
        return len(self.vars)

    def binaries(self) -> list:
        return [v for v in self.vars if v.kind == BINARY]

    def bounds_of(self, expr) -> tuple:
        """Interval range of an expression under the declared variable bounds."""
        e = LinExpr.of(expr)
        lo = hi = e.const
        for k, c in e.terms.items():
            v = self.vars[k]
            if c > 0:
                lo += c * v.lower
                hi += c * v.upper
            else:
                lo += c * v.upper
                hi += c * v.lower
        return lo, hi

    def big_m(self, expr, slack: float = 1.0) -> float:
        """Smallest M (plus slack) with ``expr <= M`` under the declared bounds."""
        return max(0.0, self.bounds_of(expr)[1]) + slack

    def add_implication(self, binary: MilpVar, expr, sense: str, rhs=0.0, tag: str = "",
                        active_value: int = 1) -> None:
        """``binary == active_value`` implies ``expr (sense) rhs`` via bound-derived big-M."""
        e = LinExpr.of(expr) - LinExpr.of(rhs)
        lo, hi = self.bounds_of(e)
        # gate g: 0 when the implication is active
        gate = (1 - LinExpr.of(binary)) if active_value == 1 else LinExpr.of(binary)
        if sense in (LE, EQ) and hi > 0:
            self.add_constraint(e - gate * (hi + 1.0), LE, 0.0, tag)
        if sense in (GE, EQ) and lo < 0:
            self.add_constraint(e + gate * (-lo + 1.0), GE, 0.0, tag)

    def max_violation(self, x) -> float:
        worst = 0.0
        for v in self.vars:
            worst = max(worst, v.lower - x[v.id], x[v.id] - v.upper)
        for c in self.constraints:
            worst = max(worst, c.violation(x))
        return worst

    def is_integral(self, x, tol: float = 1e-6) -> bool:
        return all(abs(x[v.id] - round(x[v.id])) <= tol for v in self.vars if v.kind == BINARY)

    def to_arrays(self):
        """Dense arrays ``(c, c0, A_ub, b_ub, A_eq, b_eq, lb, ub, is_bin)``.

        ``>=`` rows are negated into ``<=`` rows.
        """
        n = len(self.vars)
        c = np.zeros(n)
        for k, v in self.objective.terms.items():
            c[k] += v
        ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
        for con in self.constraints:
            row = np.zeros(n)
            for k, v in con.terms:
                row[k] += v
            if con.sense == LE:
                ub_rows.append(row), ub_rhs.append(con.rhs)
            elif con.sense == GE:
                ub_rows.append(-row), ub_rhs.append(-con.rhs)
            else:
                eq_rows.append(row), eq_rhs.append(con.rhs)
        A_ub = np.array(ub_rows).reshape(-1, n)
        A_eq = np.array(eq_rows).reshape(-1, n)
        lb = np.array([v.lower for v in self.vars])
        ub = np.array([v.upper for v in self.vars])
        is_bin = np.array([v.kind == BINARY for v in self.vars], dtype=bool)
        return c, self.objective.const, A_ub, np.array(ub_rhs), A_eq, np.array(eq_rhs), lb, ub, is_bin


def linearize_abs(model: MilpModel, y, big_m: Optional[float] = None, name: str = "abs") -> MilpVar:
    """Return a real ``z`` constrained to equal ``|y|`` at every integral point.

    ``y`` is a variable or affine expression whose magnitude is bounded by
    ``big_m`` (derived from the declared bounds when omitted).
    """
    y = LinExpr.of(y)
    lo, hi = model.bounds_of(y)
    bound = max(abs(lo), abs(hi))
    if big_m is None:
        big_m = bound
    elif big_m < bound - 1e-9:
        raise ValueError(f"big-M {big_m} does not cover the range [{lo}, {hi}] of the argument")
    z = model.add_real(f"{name}_z", 0.0, big_m)
    s = model.add_binary(f"{name}_s")
    model.ge(z, y, tag=f"{name}:z>=y")
    model.ge(z, -y, tag=f"{name}:z>=-y")
    # s = 1 selects the branch y >= 0
    model.le(z, y + 2 * big_m * (1 - LinExpr.of(s)), tag=f"{name}:z<=y")
    model.le(z, -y + 2 * big_m * LinExpr.of(s), tag=f"{name}:z<=-y")
    return z


ExprLike = Union[LinExpr, MilpVar, float, int]


def sum_expr(items: Iterable) -> LinExpr:
    out = LinExpr()
    for it in items:
        out.iadd(it)
    return out
