"""Boolean and robust monitoring of STL formulas over piecewise-linear traces.

Subformulas are evaluated on finite sets of time points. A temporal operator
evaluated at points ``S`` evaluates its operands on the base grid (regular
``step`` grid from the evaluation time, plus every partition point) together
with ``S`` itself and the window endpoints ``S + a`` and ``S + b``. Atoms are
affine between partition points, so they are decided exactly; suprema and
infima of nested temporal subformulas are approximate only between samples.

Times past the horizon are clamped to it: the trace is constant there, so
every postfix beyond ``T`` equals the postfix at ``T``.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from ..signal import TimedStateSequence
from .formula import (
    And,
    Atom,
    FalseF,
    Formula,
    NegAtom,
    Or,
    Release,
    TrueF,
    Until,
    to_nnf,
    is_nnf,
)

DEFAULT_STEP = 0.01
POS_INF = math.inf
NEG_INF = -math.inf


class _Evaluator:
    def __init__(self, trace: TimedStateSequence, t0: float, step: float, boolean: bool):
        if not step > 0:
            raise ValueError("step must be positive")
        self.trace = trace
        self.T = trace.horizon
        self.boolean = boolean
        start = min(max(t0, 0.0), self.T)
        n = int(math.floor((self.T - start) / step + 1e-9))
        grid = start + step * np.arange(n + 1)
        self.base = np.unique(np.concatenate([grid, trace.gammas, [self.T]]))
        self._col = {v: i for i, v in enumerate(trace.variables)}

    def top(self) -> float:
        return POS_INF if not self.boolean else True

    def bottom(self):
        return NEG_INF if not self.boolean else False

    def atom_values(self, atom, times: np.ndarray, negate: bool) -> np.ndarray:
        states = self.trace.values_at(times)
        val = np.full(len(times), atom.offset)
        for v, c in atom.coeffs:
            if v not in self._col:
                raise KeyError(f"trace has no variable {v!r}")
            val = val + c * states[:, self._col[v]]
        if self.boolean:
            return val < 0 if negate else val >= 0
        return -val if negate else val

    def eval(self, f: Formula, times: np.ndarray) -> np.ndarray:
        if isinstance(f, TrueF):
            return np.full(len(times), self.top(), dtype=bool if self.boolean else float)
        if isinstance(f, FalseF):
            return np.full(len(times), self.bottom(), dtype=bool if self.boolean else float)
        if isinstance(f, Atom):
            return self.atom_values(f.atom, times, False)
        if isinstance(f, NegAtom):
            return self.atom_values(f.atom, times, True)
        if isinstance(f, And):
            vals = [self.eval(a, times) for a in f.args]
            return np.minimum.reduce(vals) if len(vals) > 1 else vals[0]
        if isinstance(f, Or):
            vals = [self.eval(a, times) for a in f.args]
            return np.maximum.reduce(vals) if len(vals) > 1 else vals[0]
        if isinstance(f, (Until, Release)):
            return self.temporal(f, times)
        raise TypeError(f"cannot monitor {type(f).__name__}; convert to NNF first")

    def temporal(self, f, times: np.ndarray) -> np.ndarray:
        a, b = f.interval.lo, f.interval.hi
        T = self.T
        lo_t = np.minimum(times + a, T)
        hi_t = np.minimum(times + b, T) if math.isfinite(b) else np.full(len(times), T)
        pts = np.unique(np.concatenate([self.base, times, lo_t, hi_t]))
        rhs = self.eval(f.rhs, pts)
        lhs = self.eval(f.lhs, pts)
        s_idx = np.searchsorted(pts, times)
        w_lo = np.searchsorted(pts, lo_t)
        w_hi = np.searchsorted(pts, hi_t, side="right") - 1
        until = isinstance(f, Until)
        out = np.empty(len(times), dtype=bool if self.boolean else float)
        for k in range(len(times)):
            s, lo, hi = s_idx[k], w_lo[k], w_hi[k]
            # running inf (Until) / sup (Release) of lhs over [s, tau]
            if until:
                run = np.minimum.accumulate(lhs[s : hi + 1])[lo - s :]
                out[k] = np.max(np.minimum(rhs[lo : hi + 1], run))
            else:
                run = np.maximum.accumulate(lhs[s : hi + 1])[lo - s :]
                out[k] = np.min(np.maximum(rhs[lo : hi + 1], run))
        return out


def _prepare(f: Formula) -> Formula:
    return f if is_nnf(f) else to_nnf(f)


def eval_boolean(trace: TimedStateSequence, f: Formula, t: float = 0.0, step: float = DEFAULT_STEP) -> bool:
    """Whether the ``t``-postfix of the trace satisfies ``f``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    ev = _Evaluator(trace, t, step, boolean=True)
    return bool(ev.eval(_prepare(f), np.array([min(t, trace.horizon)]))[0])


def eval_robust(trace: TimedStateSequence, f: Formula, t: float = 0.0, step: float = DEFAULT_STEP) -> float:
    """Robust satisfaction value; ``POS_INF``/``NEG_INF`` for the constants."""
    if t < 0:
        raise ValueError("t must be non-negative")
    ev = _Evaluator(trace, t, step, boolean=False)
    return float(ev.eval(_prepare(f), np.array([min(t, trace.horizon)]))[0])


def satisfaction_signal(trace: TimedStateSequence, f: Formula, times, step: float = DEFAULT_STEP) -> np.ndarray:
    """Boolean verdicts of ``f`` at each of ``times`` (shared sampling grid from 0)."""
    ev = _Evaluator(trace, 0.0, step, boolean=True)
    times = np.minimum(np.asarray(times, dtype=float), trace.horizon)
    return ev.eval(_prepare(f), times)


def falsifying_time(trace: TimedStateSequence, f: Formula, t: float = 0.0,
                    step: float = DEFAULT_STEP) -> Optional[float]:
    """A time pinpointing why ``f`` fails at ``t``, or None if it holds.

    Descends through conjunctions and always-style windows to the earliest
    violated atom; for other operators the evaluation time itself is reported.
    """
    f = _prepare(f)
    ev = _Evaluator(trace, 0.0, step, boolean=True)

    def holds(g, s):
        return bool(ev.eval(g, np.array([min(s, trace.horizon)]))[0])

    def descend(g, s):
        if isinstance(g, And):
            for c in g.args:
                if not holds(c, s):
                    return descend(c, s)
        if isinstance(g, Release) and isinstance(g.lhs, FalseF):
            a, b = g.interval.lo, g.interval.hi
            lo = min(s + a, trace.horizon)
            hi = min(s + b, trace.horizon)
            cand = ev.base[(ev.base >= lo) & (ev.base <= hi)]
            cand = np.unique(np.concatenate([[lo, hi], cand]))
            vals = ev.eval(g.rhs, cand)
            bad = np.flatnonzero(~vals)
            if bad.size:
                return descend(g.rhs, float(cand[bad[0]]))
        return float(s)

    if holds(f, t):
        return None
    return descend(f, t)
