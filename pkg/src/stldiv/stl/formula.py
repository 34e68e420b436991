"""STL abstract syntax, negation normal form, tightening and subformula closure."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence, Union

INF = math.inf


def _fmt_num(x: float) -> str:
    if x == INF:
        return "inf"
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


@dataclass(frozen=True)
class Interval:
    """Closed time interval ``[lo, hi]`` with ``hi`` possibly infinite."""

    lo: float = 0.0
    hi: float = INF

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi) or lo < 0 or math.isinf(lo):
            raise ValueError(f"invalid interval lower bound {self.lo!r}")
        if not lo < hi:
            raise ValueError(f"singular or empty interval [{self.lo}, {self.hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def bounded(self) -> bool:
        return not math.isinf(self.hi)

    def __str__(self):
        return f"[{_fmt_num(self.lo)},{_fmt_num(self.hi)}]"


UNBOUNDED = Interval(0.0, INF)


@dataclass(frozen=True)
class AffineAtom:
    """Predicate ``sum(coeffs[v] * w[v]) + offset >= 0``.

    ``coeffs`` is stored as a sorted tuple of ``(variable, coefficient)`` pairs
    with zero coefficients dropped, so structurally equal atoms compare equal.
    """

    coeffs: tuple = ()
    offset: float = 0.0

    def __post_init__(self):
        items = self.coeffs.items() if isinstance(self.coeffs, Mapping) else self.coeffs
        merged: dict[str, float] = {}
        for name, c in items:
            merged[name] = merged.get(name, 0.0) + float(c)
        clean = tuple(sorted((k, v) for k, v in merged.items() if v != 0.0))
        for _, v in clean:
            if not math.isfinite(v):
                raise ValueError("atom coefficients must be finite")
        if not math.isfinite(float(self.offset)):
            raise ValueError("atom offset must be finite")
        object.__setattr__(self, "coeffs", clean)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def variables(self) -> tuple:
        return tuple(k for k, _ in self.coeffs)

    @property
    def is_constant(self) -> bool:
        return not self.coeffs

    def coeff_dict(self) -> dict:
        return dict(self.coeffs)

    def value(self, state: Mapping[str, float]) -> float:
        return sum(c * state[v] for v, c in self.coeffs) + self.offset

    def negated(self) -> "AffineAtom":
        return AffineAtom(tuple((v, -c) for v, c in self.coeffs), -self.offset)

    def shifted(self, delta: float) -> "AffineAtom":
        return AffineAtom(self.coeffs, self.offset - delta)

    def expr_str(self) -> str:
        parts = []
        for v, c in self.coeffs:
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            term = v if mag == 1.0 else f"{_fmt_num(mag)}*{v}"
            parts.append((sign, term))
        if self.offset != 0.0 or not parts:
            parts.append(("-" if self.offset < 0 else "+", _fmt_num(abs(self.offset))))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, term in parts[1:]:
            out += f" {sign} {term}"
        return out

    def __str__(self):
        return f"{self.expr_str()} >= 0"


class Formula:
    """Base class of formula nodes. Nodes are immutable and hashable."""

    __slots__ = ()

    def children(self) -> tuple:
        return ()

    def __and__(self, other):
        return And((self, other))

    def __or__(self, other):
        return Or((self, other))

    def __invert__(self):
        return Not(self)


@dataclass(frozen=True)
class TrueF(Formula):
    def __str__(self):
        return "true"


@dataclass(frozen=True)
class FalseF(Formula):
    def __str__(self):
        return "false"


TRUE = TrueF()
FALSE = FalseF()


@dataclass(frozen=True)
class Atom(Formula):
    atom: AffineAtom

    def __str__(self):
        return f"({self.atom})"


@dataclass(frozen=True)
class NegAtom(Formula):
    atom: AffineAtom

    def __str__(self):
        return f"!({self.atom})"


@dataclass(frozen=True)
class And(Formula):
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    def children(self):
        return self.args

    def __str__(self):
        return "(" + " && ".join(str(a) for a in self.args) + ")"


@dataclass(frozen=True)
class Or(Formula):
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    def children(self):
        return self.args

    def __str__(self):
        return "(" + " || ".join(str(a) for a in self.args) + ")"


@dataclass(frozen=True)
class Until(Formula):
    interval: Interval
    lhs: Formula
    rhs: Formula

    def children(self):
        return (self.lhs, self.rhs)

    def __str__(self):
        if self.lhs == TRUE:
            return f"Ev{self.interval}({self.rhs})"
        return f"({self.lhs} U{self.interval} {self.rhs})"


@dataclass(frozen=True)
class Release(Formula):
    interval: Interval
    lhs: Formula
    rhs: Formula

    def children(self):
        return (self.lhs, self.rhs)

    def __str__(self):
        if self.lhs == FALSE:
            return f"Alw{self.interval}({self.rhs})"
        return f"({self.lhs} R{self.interval} {self.rhs})"


# Parse-level connectives; eliminated by to_nnf.
@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)

    def __str__(self):
        return f"!{self.arg}"


@dataclass(frozen=True)
class Implies(Formula):
    lhs: Formula
    rhs: Formula

    def children(self):
        return (self.lhs, self.rhs)

    def __str__(self):
        return f"({self.lhs} -> {self.rhs})"


def eventually(f: Formula, interval: Interval = UNBOUNDED) -> Until:
    return Until(interval, TRUE, f)


def always(f: Formula, interval: Interval = UNBOUNDED) -> Release:
    return Release(interval, FALSE, f)


def is_nnf(f: Formula) -> bool:
    if isinstance(f, (Not, Implies)):
        return False
    return all(is_nnf(c) for c in f.children())


def _mk_and(args: Sequence[Formula]) -> Formula:
    flat: list[Formula] = []
    for a in args:
        if isinstance(a, FalseF):
            return FALSE
        if isinstance(a, TrueF):
            continue
        for b in (a.args if isinstance(a, And) else (a,)):
            if b not in flat:
                flat.append(b)
    if not flat:
        return TRUE
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def _mk_or(args: Sequence[Formula]) -> Formula:
    flat: list[Formula] = []
    for a in args:
        if isinstance(a, TrueF):
            return TRUE
        if isinstance(a, FalseF):
            continue
        for b in (a.args if isinstance(a, Or) else (a,)):
            if b not in flat:
                flat.append(b)
    if not flat:
        return FALSE
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def _mk_until(iv: Interval, lhs: Formula, rhs: Formula) -> Formula:
    if isinstance(lhs, FalseF) or isinstance(rhs, FalseF):
        return FALSE
    if isinstance(lhs, TrueF) and isinstance(rhs, TrueF):
        return TRUE
    return Until(iv, lhs, rhs)


def _mk_release(iv: Interval, lhs: Formula, rhs: Formula) -> Formula:
    if isinstance(lhs, TrueF) or isinstance(rhs, TrueF):
        return TRUE
    if isinstance(lhs, FalseF) and isinstance(rhs, FalseF):
        return FALSE
    return Release(iv, lhs, rhs)


def _constant_atom(atom: AffineAtom, negate: bool) -> Formula:
    holds = atom.offset >= 0
    if negate:
        holds = not holds
    return TRUE if holds else FALSE


def to_nnf(f: Formula, negate: bool = False) -> Formula:
    """Push negations to atoms and eliminate implications.

    Constants are folded and nested conjunctions/disjunctions flattened, so the
    result is a canonical NNF; applying it twice is the identity.
    """
    if isinstance(f, TrueF):
        return FALSE if negate else TRUE
    if isinstance(f, FalseF):
        return TRUE if negate else FALSE
    if isinstance(f, Atom):
        if f.atom.is_constant:
            return _constant_atom(f.atom, negate)
        return NegAtom(f.atom) if negate else f
    if isinstance(f, NegAtom):
        if f.atom.is_constant:
            return _constant_atom(f.atom, not negate)
        return Atom(f.atom) if negate else f
    if isinstance(f, Not):
        return to_nnf(f.arg, not negate)
    if isinstance(f, Implies):
        return to_nnf(Or((Not(f.lhs), f.rhs)), negate)
    if isinstance(f, And):
        args = [to_nnf(a, negate) for a in f.args]
        return _mk_or(args) if negate else _mk_and(args)
    if isinstance(f, Or):
        args = [to_nnf(a, negate) for a in f.args]
        return _mk_and(args) if negate else _mk_or(args)
    if isinstance(f, Until):
        lhs, rhs = to_nnf(f.lhs, negate), to_nnf(f.rhs, negate)
        return _mk_release(f.interval, lhs, rhs) if negate else _mk_until(f.interval, lhs, rhs)
    if isinstance(f, Release):
        lhs, rhs = to_nnf(f.lhs, negate), to_nnf(f.rhs, negate)
        return _mk_until(f.interval, lhs, rhs) if negate else _mk_release(f.interval, lhs, rhs)
    raise TypeError(f"not a formula: {f!r}")


def tighten(f: Formula, delta: float) -> Formula:
    """Require every atom of an NNF formula to hold with margin ``delta``."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    if isinstance(f, Atom):
        return Atom(f.atom.shifted(delta))
    if isinstance(f, NegAtom):
        return Atom(f.atom.negated().shifted(delta))
    if isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, And):
        return And(tuple(tighten(a, delta) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(tighten(a, delta) for a in f.args))
    if isinstance(f, Until):
        return Until(f.interval, tighten(f.lhs, delta), tighten(f.rhs, delta))
    if isinstance(f, Release):
        return Release(f.interval, tighten(f.lhs, delta), tighten(f.rhs, delta))
    raise ValueError("tighten expects a formula in NNF")


def atoms_of(f: Formula) -> Iterator[AffineAtom]:
    if isinstance(f, (Atom, NegAtom)):
        yield f.atom
    for c in f.children():
        yield from atoms_of(c)


def variables_of(f: Formula) -> set:
    return {v for a in atoms_of(f) for v in a.variables}


def temporal_depth(f: Formula) -> float:
    """Upper bound on how far into the future ``f`` looks (may be infinite)."""
    if isinstance(f, (Until, Release)):
        return f.interval.hi + max(temporal_depth(f.lhs), temporal_depth(f.rhs))
    return max((temporal_depth(c) for c in f.children()), default=0.0)


@dataclass(frozen=True)
class SubformulaTable:
    """Distinct non-constant subformulas in children-before-parents order."""

    entries: tuple
    _index: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self._index.update({f: i for i, f in enumerate(self.entries)})

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i: int) -> Formula:
        return self.entries[i]

    def __contains__(self, f) -> bool:
        return f in self._index

    def index(self, f: Formula) -> int:
        return self._index[f]


def subformulas(f: Formula) -> SubformulaTable:
    if not is_nnf(f):
        raise ValueError("subformulas expects a formula in NNF")
    seen: dict = {}

    def visit(g: Formula):
        if g in seen or isinstance(g, (TrueF, FalseF)):
            return
        for c in g.children():
            visit(c)
        seen[g] = len(seen)

    visit(f)
    return SubformulaTable(tuple(seen))


AnyFormula = Union[TrueF, FalseF, Atom, NegAtom, And, Or, Until, Release, Not, Implies]
