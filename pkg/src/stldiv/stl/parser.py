"""Recursive-descent parser for the textual STL formula language.

Grammar (whitespace-insensitive, lowest precedence first)::

    formula  := disj ('->' formula)?
    disj     := conj ('||' conj)*
    conj     := binary ('&&' binary)*
    binary   := unary (('U' | 'R') interval? unary)*
    unary    := '!' unary | temporal | atom | '(' formula ')' | 'true' | 'false'
    temporal := ('Ev' | 'Alw') interval? '(' formula ')'
              | ('BoundedEv' | 'BoundedAlw' | 'Ev' | 'Alw') '(' interval ',' formula ')'
    atom     := expr ('>=' | '<=') expr
    interval := '[' number ',' (number | 'inf') ']'
"""
from __future__ import annotations

import re
from typing import Collection, Optional

from .formula import (
    FALSE,
    TRUE,
    AffineAtom,
    Atom,
    Formula,
    Implies,
    Interval,
    Not,
    Release,
    Until,
    And,
    Or,
    to_nnf,
)

KEYWORDS = {"true", "false", "inf", "Ev", "Alw", "BoundedEv", "BoundedAlw", "U", "R"}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?|\d+(?:[eE][-+]?\d+)?)"
    r"|(?P<id>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>->|&&|\|\||>=|<=|[-+*/!(),\[\]<>]))"
)


class ParseError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} at line {line}, column {col}")
        self.pos, self.line, self.column = pos, line, col


class _Tok:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind, text, pos):
        self.kind, self.text, self.pos = kind, text, pos


def _tokenize(text: str) -> list:
    toks, pos = [], 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            ws = len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[pos + ws]!r}", text, pos + ws)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append(_Tok(kind, m.group(kind), start))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, variables: Optional[Collection[str]]):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.variables = set(variables) if variables is not None else None

    # -- token helpers
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: Optional[_Tok] = None):
        tok = tok or self.tok
        raise ParseError(msg, self.text, tok.pos)

    def accept(self, text: str) -> bool:
        if self.tok.kind in ("op", "id") and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            found = self.tok.text or "end of input"
            self.error(f"expected {text!r} but found {found!r}")

    # -- formulas
    def parse(self) -> Formula:
        f = self.formula()
        if self.tok.kind != "eof":
            self.error(f"unexpected token {self.tok.text!r}")
        return f

    def formula(self) -> Formula:
        lhs = self.disj()
        if self.accept("->"):
            return Implies(lhs, self.formula())
        return lhs

    def disj(self) -> Formula:
        args = [self.conj()]
        while self.accept("||"):
            args.append(self.conj())
        return args[0] if len(args) == 1 else Or(tuple(args))

    def conj(self) -> Formula:
        args = [self.binary()]
        while self.accept("&&"):
            args.append(self.binary())
        return args[0] if len(args) == 1 else And(tuple(args))

    def binary(self) -> Formula:
        lhs = self.unary()
        while self.tok.kind == "id" and self.tok.text in ("U", "R"):
            op = self.tok.text
            self.i += 1
            iv = self.interval() if self.tok.text == "[" else Interval()
            rhs = self.unary()
            lhs = Until(iv, lhs, rhs) if op == "U" else Release(iv, lhs, rhs)
        return lhs

    def unary(self) -> Formula:
        tok = self.tok
        if self.accept("!"):
            return Not(self.unary())
        if tok.kind == "id":
            if tok.text == "true":
                self.i += 1
                return TRUE
            if tok.text == "false":
                self.i += 1
                return FALSE
            if tok.text in ("Ev", "Alw", "BoundedEv", "BoundedAlw"):
                return self.temporal()
        if tok.text == "(":
            save = self.i
            try:
                return self.atom()
            except ParseError:
                self.i = save
            self.i += 1
            f = self.formula()
            self.expect(")")
            return f
        return self.atom()

    def temporal(self) -> Formula:
        name = self.tok.text
        self.i += 1
        if self.tok.text == "[":
            if name.startswith("Bounded"):
                self.error(f"{name} takes its interval as first argument")
            iv = self.interval()
            self.expect("(")
            body = self.formula()
            self.expect(")")
        else:
            self.expect("(")
            if self.tok.text in ("[", "("):
                save = self.i
                try:
                    iv = self.interval()
                    self.expect(",")
                except ParseError:
                    if name.startswith("Bounded") or self.toks[save].text == "[":
                        raise
                    self.i = save
                    iv = Interval()
            elif name.startswith("Bounded"):
                self.error(f"{name} requires an interval")
            else:
                iv = Interval()
            body = self.formula()
            self.expect(")")
        if name in ("Ev", "BoundedEv"):
            return Until(iv, TRUE, body)
        return Release(iv, FALSE, body)

    def interval(self) -> Interval:
        start = self.tok
        if self.tok.text == "(":
            self.error("open intervals are not supported; use [a, b]")
        self.expect("[")
        lo = self.number()
        self.expect(",")
        if self.tok.kind == "id" and self.tok.text == "inf":
            self.i += 1
            hi = float("inf")
        else:
            hi = self.number()
        if self.tok.text == ")":
            self.error("open intervals are not supported; use [a, b]")
        self.expect("]")
        try:
            return Interval(lo, hi)
        except ValueError as exc:
            self.error(str(exc), start)

    def number(self) -> float:
        sign = 1.0
        if self.accept("-"):
            sign = -1.0
        if self.tok.kind != "num":
            self.error("expected a number")
        v = float(self.tok.text)
        self.i += 1
        return sign * v

    # -- affine expressions
    def atom(self) -> Formula:
        start = self.tok
        lhs = self.expr()
        op = self.tok.text
        if op not in (">=", "<="):
            if op in (">", "<"):
                self.error("strict comparisons are not supported; use >= or <=")
            self.error("expected '>=' or '<=' in atomic proposition")
        self.i += 1
        rhs = self.expr()
        diff = _sub(lhs, rhs) if op == ">=" else _sub(rhs, lhs)
        coeffs, const = diff
        atom = AffineAtom(tuple(coeffs.items()), const)
        if self.variables is not None:
            for v in atom.variables:
                if v not in self.variables:
                    self.error(f"unknown variable {v!r}", start)
        return Atom(atom)

    def expr(self):
        acc = self.term()
        while self.tok.text in ("+", "-"):
            op = self.tok.text
            self.i += 1
            rhs = self.term()
            acc = _add(acc, rhs) if op == "+" else _sub(acc, rhs)
        return acc

    def term(self):
        acc = self.factor()
        while self.tok.text in ("*", "/"):
            op_tok = self.tok
            self.i += 1
            rhs = self.factor()
            if op_tok.text == "*":
                if not acc[0]:
                    acc = _scale(rhs, acc[1])
                elif not rhs[0]:
                    acc = _scale(acc, rhs[1])
                else:
                    self.error("nonlinear product of variables", op_tok)
            else:
                if rhs[0]:
                    self.error("division by a variable", op_tok)
                if rhs[1] == 0:
                    self.error("division by zero", op_tok)
                acc = _scale(acc, 1.0 / rhs[1])
        return acc

    def factor(self):
        tok = self.tok
        if self.accept("-"):
            return _scale(self.factor(), -1.0)
        if self.accept("+"):
            return self.factor()
        if tok.kind == "num":
            self.i += 1
            return ({}, float(tok.text))
        if tok.kind == "id":
            if tok.text in KEYWORDS:
                self.error(f"unexpected keyword {tok.text!r}")
            self.i += 1
            return ({tok.text: 1.0}, 0.0)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        self.error(f"unexpected token {tok.text or 'end of input'!r}")


def _add(a, b):
    c = dict(a[0])
    for k, v in b[0].items():
        c[k] = c.get(k, 0.0) + v
    return ({k: v for k, v in c.items() if v != 0.0}, a[1] + b[1])


def _scale(a, s):
    return ({k: v * s for k, v in a[0].items() if v * s != 0.0}, a[1] * s)


def _sub(a, b):
    return _add(a, _scale(b, -1.0))


def parse_raw(text: str, variables: Optional[Collection[str]] = None) -> Formula:
    """Parse without normalizing; negation and implication are kept."""
    return _Parser(text, variables).parse()


def parse(text: str, variables: Optional[Collection[str]] = None) -> Formula:
    """Parse ``text`` and return its negation normal form.

    If ``variables`` is given, atoms mentioning any other name are rejected.
    """
    return to_nnf(parse_raw(text, variables))
