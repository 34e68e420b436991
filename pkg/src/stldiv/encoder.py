"""Compile (system model, NNF formula, bound N, delta) into a MILP.

Cells are ``[g_{i-1}, g_i]`` for ``i = 1..N``. A valuation bit ``b[psi, i]``
set to 1 certifies that every postfix starting in cell ``i`` satisfies
``psi``; a 0 bit claims nothing. Since the trace is constant after the
horizon, every postfix starting past ``T`` equals the one at ``T``, so
cell ``N`` effectively covers ``[g_{N-1}, inf)``.

Integrator dynamics multiply a cell width by a rate, which is bilinear. When
the model has integrators, cell widths are restricted to multiples of a
lattice step ``h`` (``width_i = h * n_i`` with ``n_i`` binary-expanded) and
each product of an expansion bit with a bounded rate expression is
linearized exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .milp import GE, LE, LinExpr, MilpModel, Solution, sum_expr
from .signal import TimedStateSequence, Trace
from .stl.formula import (
    And,
    Atom,
    FalseF,
    Formula,
    NegAtom,
    Or,
    Release,
    TrueF,
    Until,
    is_nnf,
    subformulas,
    variables_of,
)
from .system import IntegratorLink, SystemModel

DEFAULT_DELTA = 0.01
DEFAULT_LATTICE = 50
INTEGRALITY_TOL = 1e-6


class DecodeError(ValueError):
    pass


@dataclass
class EncodingConfig:
    bound: int
    horizon: float
    delta: float = DEFAULT_DELTA
    min_width: Optional[float] = None  # defaults to 1e-3 * horizon
    time_lattice: Optional[int] = None  # cells of the time lattice; DEFAULT_LATTICE if needed
    margin: float = 1e-4  # slack on timing constraints, absorbs solver tolerance
    one_sided: bool = True

    def __post_init__(self):
        if self.bound < 1:
            raise ValueError("bound N must be at least 1")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.min_width is None:
            self.min_width = 1e-3 * self.horizon
        if not self.min_width > 0 or self.min_width * self.bound > self.horizon + 1e-12:
            raise ValueError("need 0 < min_width and min_width * N <= horizon")
        if self.time_lattice is not None and self.time_lattice < self.bound:
            raise ValueError("time lattice must have at least N steps")
        if not self.one_sided:
            raise NotImplementedError("only the one-sided encoding is implemented")


@dataclass
class EncodingHandles:
    config: EncodingConfig
    formula: Formula
    table: object  # SubformulaTable
    variables: tuple
    gamma: list
    state: dict  # (i, var name) -> MilpVar
    valuation: dict  # (subformula index, cell) -> MilpVar, cells 1..N
    locations: dict = field(default_factory=dict)  # (cell, location name) -> MilpVar
    lattice_step: Optional[float] = None
    inputs: tuple = ()

    def valuation_items(self) -> list:
        """``[(index, cell, var), ...]`` in index-major order."""
        return [(k, i, v) for (k, i), v in sorted(self.valuation.items())]


class _Encoder:
    def __init__(self, system: SystemModel, phi: Formula, cfg: EncodingConfig):
        if not is_nnf(phi):
            raise ValueError("formula must be in negation normal form")
        missing = variables_of(phi) - set(system.names)
        if missing:
            raise ValueError(f"formula uses undeclared variables {sorted(missing)}")
        self.sys = system
        self.phi = phi
        self.cfg = cfg
        self.N = cfg.bound
        self.T = cfg.horizon
        self.m = MilpModel("stl")
        self.table = subformulas(phi)
        self.state = {}
        self.bits = {}
        self.locs = {}
        self.h = None

    # -- variables
    def build(self):
        N, T, m = self.N, self.T, self.m
        self.gamma = [m.add_real(f"g{i}", 0.0, T) for i in range(N + 1)]
        for i in range(N + 1):
            for v in self.sys.variables:
                lo, hi = v.lo, v.hi
                if i == 0 and v.name in self.sys.init:
                    lo, hi = self.sys.init[v.name]
                self.state[i, v.name] = m.add_real(f"x{i}_{v.name}", lo, hi)
        for k, f in enumerate(self.table):
            for i in range(1, N + 1):
                self.bits[k, i] = m.add_binary(f"b{k}_{i}")
        self.partition()
        self.dynamics()
        for k, f in enumerate(self.table):
            self.encode_node(k, f)
        root = self.bit(self.phi, 1)
        if isinstance(root, LinExpr) and not root.terms:
            if root.const < 1:
                # unsatisfiable root: keep the model well-formed but infeasible
                z = m.add_real("root_false", 0.0, 0.0)
                m.ge(z, 1.0, tag="root")
        else:
            m.eq(root, 1.0, tag="root")
        return self.m, EncodingHandles(
            self.cfg, self.phi, self.table, self.sys.names, self.gamma, self.state,
            dict(self.bits), self.locs, self.h, tuple(self.sys.inputs()),
        )

    def bit(self, f: Formula, i: int):
        if isinstance(f, TrueF):
            return LinExpr(const=1.0)
        if isinstance(f, FalseF):
            return LinExpr(const=0.0)
        return LinExpr.of(self.bits[self.table.index(f), i])

    def width(self, i):
        return self.gamma[i] - self.gamma[i - 1]

    # -- partition and dynamics
    def partition(self):
        m, N, cfg = self.m, self.N, self.cfg
        m.eq(self.gamma[0], 0.0, tag="g0")
        m.eq(self.gamma[N], self.T, tag="gN")
        self.expansion = {}
        if self.sys.integrators():
            L = cfg.time_lattice or max(DEFAULT_LATTICE, N)
            self.h = h = self.T / L
            if h < cfg.min_width - 1e-12:
                raise ValueError("lattice step is below the minimum cell width")
            nbits = max(1, (L - N).bit_length())
            for i in range(1, N + 1):
                ys = [m.add_binary(f"n{i}_{k}") for k in range(nbits)]
                self.expansion[i] = ys
                n_i = 1 + sum_expr((2 ** k) * y for k, y in enumerate(ys))
                m.eq(self.width(i), h * n_i, tag=f"lattice{i}")
        else:
            for i in range(1, N + 1):
                m.ge(self.width(i), cfg.min_width, tag=f"width{i}")

    def product(self, y, s: LinExpr, name: str):
        """Real ``p`` with ``p = y * s`` at integral ``y`` (s bounded affine)."""
        m = self.m
        lo, hi = m.bounds_of(s)
        p = m.add_real(name, min(lo, 0.0), max(hi, 0.0))
        m.le(p, hi * LinExpr.of(y), tag=name)
        m.ge(p, lo * LinExpr.of(y), tag=name)
        m.le(p, s - lo * (1 - LinExpr.of(y)), tag=name)
        m.ge(p, s - hi * (1 - LinExpr.of(y)), tag=name)
        return p

    def times_width(self, i: int, s: LinExpr, name: str) -> LinExpr:
        """Exact ``s * (g_i - g_{i-1})`` on the lattice."""
        out = LinExpr.of(s) * self.h
        for k, y in enumerate(self.expansion[i]):
            out.iadd(self.product(y, s, f"{name}_p{k}"), self.h * 2 ** k)
        return out

    def dynamics(self):
        m, N, st = self.m, self.N, self.state
        inputs = self.sys.inputs()
        for u, blk in inputs.items():
            for i in range(N + 1):
                if blk.lo is not None:
                    m.ge(st[i, u], blk.lo, tag=f"input_{u}")
                if blk.hi is not None:
                    m.le(st[i, u], blk.hi, tag=f"input_{u}")
            # node i stores the value held on cell i; node 0 repeats cell 1
            m.eq(st[0, u], st[1, u], tag=f"input_{u}_0")
        for blk in self.sys.integrators():
            x, r = blk.state, blk.rate
            for i in range(1, N + 1):
                if r in inputs:
                    s = LinExpr.of(st[i, r])
                    inc = self.times_width(i, s, f"int_{x}_{i}")
                else:
                    s = st[i - 1, r] + st[i, r]
                    inc = self.times_width(i, s, f"int_{x}_{i}") * 0.5
                m.eq(st[i, x] - st[i - 1, x], inc, tag=f"int_{x}_{i}")
        for a, rha in enumerate(self.sys.automata()):
            self.automaton(a, rha)

    def automaton(self, a: int, rha):
        m, N, st = self.m, self.N, self.state
        for i in range(1, N + 1):
            sel = []
            for loc in rha.locations:
                ell = m.add_binary(f"loc{a}_{i}_{loc.name}")
                self.locs[i, loc.name] = ell
                sel.append(ell)
                w = self.width(i)
                for v, (clo, chi) in loc.flow.items():
                    d = st[i, v] - st[i - 1, v]
                    m.add_implication(ell, d - clo * w, GE, 0.0, tag=f"flow_{loc.name}_{v}_{i}")
                    m.add_implication(ell, d - chi * w, LE, 0.0, tag=f"flow_{loc.name}_{v}_{i}")
                for v, (blo, bhi) in loc.invariant.items():
                    for j in (i - 1, i):
                        m.add_implication(ell, st[j, v], GE, blo, tag=f"inv_{loc.name}_{v}_{i}")
                        m.add_implication(ell, st[j, v], LE, bhi, tag=f"inv_{loc.name}_{v}_{i}")
                if i == 1 and loc.name not in rha.initial:
                    m.eq(ell, 0.0, tag=f"init_{loc.name}")
            m.eq(sum_expr(sel), 1.0, tag=f"loc{a}_{i}")

    # -- formula
    def encode_node(self, k: int, f: Formula):
        for i in range(1, self.N + 1):
            b = self.bits[k, i]
            if isinstance(f, (Atom, NegAtom)):
                self.atom(b, f, i)
            elif isinstance(f, And):
                kids = [self.bit(c, i) for c in f.args]
                for c in kids:
                    self.m.le(b, c, tag=f"and{k}_{i}")
                self.m.ge(b, sum_expr(kids) - (len(kids) - 1), tag=f"and{k}_{i}")
            elif isinstance(f, Or):
                kids = [self.bit(c, i) for c in f.args]
                for c in kids:
                    self.m.ge(b, c, tag=f"or{k}_{i}")
                self.m.le(b, sum_expr(kids), tag=f"or{k}_{i}")
        if isinstance(f, Until):
            self.until(k, f)
        elif isinstance(f, Release):
            self.release(k, f)

    def atom(self, b, f, i: int):
        at = f.atom
        sign = 1.0 if isinstance(f, Atom) else -1.0
        for j in (i - 1, i):
            e = LinExpr(const=sign * at.offset)
            for v, c in at.coeffs:
                e.add_term(self.state[j, v], sign * c)
            self.m.add_implication(b, e, GE, self.cfg.delta, tag=f"atom_{i}_{j}")

    def until(self, k: int, f: Until):
        m, N, g, eta = self.m, self.N, self.gamma, self.cfg.margin
        a, bnd = f.interval.lo, f.interval.hi
        for i in range(1, N + 1):
            sel = {}
            for j in range(i, N + 1):
                if j < N and j == i and a > 0:
                    continue  # g_i + a <= g_i is impossible
                u = m.add_binary(f"u{k}_{i}_{j}")
                sel[j] = u
                m.le(u, self.bit(f.rhs, j), tag=f"until{k}_{i}_{j}")
                if j < N:
                    m.add_implication(u, g[i] - g[j], LE, -a - eta, tag=f"until{k}_{i}_{j}")
                if math.isfinite(bnd) and bnd < self.T and j > 1:
                    m.add_implication(u, g[j - 1] - g[i - 1], LE, bnd - eta, tag=f"until{k}_{i}_{j}")
            b = self.bits[k, i]
            m.le(b, sum_expr(sel.values()), tag=f"until{k}_{i}")
            m.le(sum_expr(sel.values()), 1.0, tag=f"until{k}_{i}")
            if not isinstance(f.lhs, TrueF):
                for kk in range(i, N + 1):
                    covering = [u for j, u in sel.items() if j >= kk]
                    if covering:
                        m.ge(self.bit(f.lhs, kk), sum_expr(covering), tag=f"until{k}_{i}_lhs")

    def release(self, k: int, f: Release):
        m, N, g, eta = self.m, self.N, self.gamma, self.cfg.margin
        a, bnd = f.interval.lo, f.interval.hi
        finite = math.isfinite(bnd)
        for i in range(1, N + 1):
            b = self.bits[k, i]
            for kk in range(i, N + 1):
                cover = self.bit(f.rhs, kk)
                if a > 0 and kk < N:
                    e = m.add_binary(f"e{k}_{i}_{kk}")
                    # cell kk ends before the earliest window start
                    m.add_implication(e, g[kk] - g[i - 1], LE, a - eta, tag=f"rel{k}_{i}_{kk}")
                    cover = cover + e
                if finite and kk > i:
                    fx = m.add_binary(f"f{k}_{i}_{kk}")
                    # cell kk starts after the latest window end
                    m.add_implication(fx, g[kk - 1] - g[i], GE, bnd + eta, tag=f"rel{k}_{i}_{kk}")
                    cover = cover + fx
                if not isinstance(f.lhs, FalseF):
                    cover = cover + sum_expr(self.bit(f.lhs, j) for j in range(i, kk + 1))
                m.ge(cover, b, tag=f"rel{k}_{i}_{kk}")


def encode(system: SystemModel, phi: Formula, cfg: EncodingConfig):
    """Return ``(MilpModel, EncodingHandles)`` for ``phi`` over ``system``."""
    return _Encoder(system, phi, cfg).build()


def _round_bit(val: float, what: str) -> int:
    r = round(val)
    if abs(val - r) > INTEGRALITY_TOL:
        raise DecodeError(f"{what} is not integral ({val!r})")
    return int(r)


def decode_valuations(handles: EncodingHandles, values) -> dict:
    """``{subformula index: '0101...'}`` with one character per cell."""
    out = {}
    for k in range(len(handles.table)):
        chars = []
        for i in range(1, handles.config.bound + 1):
            var = handles.valuation[k, i]
            chars.append(str(_round_bit(float(values[var.id]), f"valuation bit {var.name}")))
        out[k] = "".join(chars)
    return out


def decode(handles: EncodingHandles, solution: Solution, **meta) -> Trace:
    """Read the trace and valuation bits from a solved encoding."""
    if solution.values is None:
        raise DecodeError(f"solution has no assignment (status {solution.status.value})")
    x = solution.values
    N = handles.config.bound
    gam = np.array([float(x[v.id]) for v in handles.gamma])
    gam[0], gam[-1] = 0.0, handles.config.horizon
    if handles.lattice_step is not None:
        # widths are exact lattice multiples; remove solver round-off
        steps = np.round(gam / handles.lattice_step)
        gam = steps * handles.lattice_step
        gam[-1] = handles.config.horizon
    states = np.array(
        [[float(x[handles.state[i, v].id]) for v in handles.variables] for i in range(N + 1)]
    )
    vals = decode_valuations(handles, x)
    tss = TimedStateSequence(gam, handles.variables, states)
    return Trace(tss, bound=N, delta=handles.config.delta, objective=solution.objective,
                 valuations=vals, **meta)


def valuation_matrix(handles: EncodingHandles, values) -> np.ndarray:
    """Bits as an ``|sub| x N`` integer matrix."""
    vals = decode_valuations(handles, values)
    return np.array([[int(c) for c in vals[k]] for k in range(len(handles.table))], dtype=int)
