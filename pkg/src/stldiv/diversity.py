"""Diversification objectives and the iterative synthesis driver.

Methods:

* ``sp``  plain re-solve of the feasibility problem (optionally with a cut
  excluding previous valuations),
* ``bd``  maximize the Hamming distance of valuation bits to all previous
  traces,
* ``rbd`` maximize the Hamming distance to a fresh random reference,
* ``vd``  pin the time sequence of the first trace and maximize the summed
  absolute state differences to all previous traces.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import encoder as enc
from .milp import LinExpr, MilpModel, SolverParams, Status, linearize_abs, solve, sum_expr
from .signal import DEFAULT_APED_STEP, Trace, aped
from .stl import eval_boolean

METHODS = ("sp", "bd", "rbd", "vd")
MONITOR_STEP = 0.01


# ----------------------------------------------------------------- distances

def boolean_distance(m1, m2) -> int:
    a, b = np.asarray(m1), np.asarray(m2)
    if a.shape != b.shape:
        raise ValueError(f"valuation shapes differ: {a.shape} vs {b.shape}")
    return int(np.sum(a.astype(int) != b.astype(int)))


def _flat_vars(handles) -> list:
    return [v for _, _, v in handles.valuation_items()]


def hamming_objective(consts, handles) -> LinExpr:
    """``sum (1 - 2c) b + c`` over the flattened valuation bits."""
    bits = _flat_vars(handles)
    c = np.asarray(consts, dtype=int).ravel()
    if c.size != len(bits):
        raise ValueError(f"reference has {c.size} bits, model has {len(bits)}")
    out = LinExpr()
    for ci, b in zip(c, bits):
        out.add_term(b, 1.0 - 2.0 * ci)
        out.const += float(ci)
    return out


def bd_objective(prev: Sequence, handles) -> LinExpr:
    """Sum of Hamming distances to every previous valuation matrix."""
    out = LinExpr()
    for mat in prev:
        out.iadd(hamming_objective(mat, handles))
    return out


def reference_bits(rng: np.random.Generator, dims: tuple) -> np.ndarray:
    """Uniform reference valuation of shape ``dims`` (|sub|, N)."""
    return rng.integers(0, 2, size=dims, dtype=np.int64)


def rbd_objective(reference, handles) -> LinExpr:
    return hamming_objective(reference, handles)


def bits_to_str(bits) -> str:
    return "".join(str(int(b)) for b in np.asarray(bits).ravel())


# ----------------------------------------------------------------- VD

def vd_extend(model: MilpModel, handles, prev: Sequence[Trace]) -> LinExpr:
    """Pin the time sequence to the previous traces' and add |x - x_prev| terms.

    Returns the objective (also installed on ``model``). With no previous
    traces nothing is added and the objective is 0.
    """
    if not prev:
        model.set_objective(LinExpr())
        return LinExpr()
    gam = prev[0].tss.gammas
    for tr in prev[1:]:
        if not np.array_equal(tr.tss.gammas, gam):
            raise ValueError("value distance needs previous traces with identical time sequences")
    for g, val in zip(handles.gamma, gam):
        model.fix(g, val)
    obj = LinExpr()
    N = handles.config.bound
    for k, tr in enumerate(prev):
        if tr.variables != handles.variables:
            raise ValueError("previous trace has different variables")
        for i in range(N + 1):
            for j, v in enumerate(handles.variables):
                x = handles.state[i, v]
                c = float(tr.tss.states[i, j])
                y = model.add_real(f"vdY{k}_{i}_{v}", x.lower - c, x.upper - c)
                model.eq(y, x - c, tag=f"vdY{k}_{i}_{v}")
                z = linearize_abs(model, y, name=f"vdZ{k}_{i}_{v}")
                obj.add_term(z, 1.0)
    model.set_objective(obj)
    return obj


def exclusion_cut(model: MilpModel, handles, bits) -> None:
    """Forbid the exact valuation ``bits`` (|sub| x N)."""
    expr = LinExpr()
    for c, b in zip(np.asarray(bits).ravel(), _flat_vars(handles)):
        if c:
            expr.iadd(1 - LinExpr.of(b))
        else:
            expr.add_term(b, 1.0)
    model.ge(expr, 1.0, tag="distinct")


# ----------------------------------------------------------------- collisions

def collision_probability_exact(d: int, m: int) -> float:
    """Chance that ``m`` uniform references in ``{0,1}^d`` are not all distinct."""
    if d < 1 or m < 2:
        raise ValueError("need d >= 1 and m >= 2")
    if m > 2 ** d:
        raise ValueError("m exceeds 2^d; a collision is certain")
    log_p = 0.0
    for k in range(1, m):
        log_p += math.log1p(-k / 2.0 ** d)
    return -math.expm1(log_p)


def collision_probability_bound(d: int, m: int) -> float:
    if d < 1 or m < 2:
        raise ValueError("need d >= 1 and m >= 2")
    return m * (m - 1) / 2.0 ** (d + 1)


# ----------------------------------------------------------------- driver

@dataclass
class Iteration:
    index: int
    status: str  # solver status, or "unsound" when the monitor rejects the trace
    objective: Optional[float] = None
    wall_time: float = 0.0
    trace: Optional[Trace] = None
    reference: Optional[str] = None
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.trace is not None


@dataclass
class SynthesisRun:
    benchmark: str
    method: str
    seed: Optional[int]
    bound: int
    delta: float
    timeout: float
    iterations: list = field(default_factory=list)

    @property
    def traces(self) -> list:
        return [it.trace for it in self.iterations if it.ok]

    def aped(self, step: float = DEFAULT_APED_STEP) -> float:
        tr = self.traces
        return aped(tr, step) if tr else 0.0


def _solve_iteration(model, params, engine):
    t0 = time.monotonic()
    sol = solve(model, params, engine)
    return sol, time.monotonic() - t0


def synthesize(spec, method: str, m: int, seed: Optional[int] = None, timeout: float = 120.0,
               bound: Optional[int] = None, delta: Optional[float] = None, engine: str = "auto",
               distinct: bool = False, on_iteration=None) -> SynthesisRun:
    """Produce up to ``m`` traces of ``spec`` diversified by ``method``."""
    method = method.lower()
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    if m < 1:
        raise ValueError("need at least one trace")
    if method == "rbd" and seed is None:
        raise ValueError("RBD needs a seed")
    phi = spec.phi()
    cfg = spec.encoding_config(bound=bound, delta=delta)
    params = SolverParams(timeout=timeout)
    rng = np.random.default_rng(seed) if method == "rbd" else None
    run = SynthesisRun(spec.id, method, seed, cfg.bound, cfg.delta, timeout)
    accepted: list = []
    matrices: list = []

    for k in range(1, m + 1):
        model, handles = enc.encode(spec.system, phi, cfg)
        ref_str = None
        if k >= 2:
            if method == "bd":
                model.set_objective(bd_objective(matrices, handles))
            elif method == "rbd":
                ref = reference_bits(rng, (len(handles.table), cfg.bound))
                ref_str = bits_to_str(ref)
                model.set_objective(rbd_objective(ref, handles))
            elif method == "vd":
                vd_extend(model, handles, accepted)
            elif method == "sp" and distinct:
                for mat in matrices:
                    exclusion_cut(model, handles, mat)
        sol, wall = _solve_iteration(model.seal(), params, engine)
        it = Iteration(k, sol.status.value, sol.objective, wall, reference=ref_str)
        if sol.status.has_solution:
            trace = enc.decode(handles, sol, benchmark=spec.id, method=method.upper(),
                               iteration=k, seed=seed, reference=ref_str)
            if eval_boolean(trace.tss, phi, 0.0, MONITOR_STEP):
                it.trace = trace
                accepted.append(trace)
                matrices.append(enc.valuation_matrix(handles, sol.values))
            else:
                it.status = "unsound"
                it.message = "decoded trace fails the monitor"
        elif sol.status == Status.TIMEOUT:
            it.message = "no feasible trace found within the timeout"
        run.iterations.append(it)
        if on_iteration is not None:
            on_iteration(it)
    return run
