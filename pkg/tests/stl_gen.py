"""Random NNF formulas and piecewise-linear traces for property tests."""
from __future__ import annotations

import numpy as np

from stldiv.signal import TimedStateSequence
from stldiv.stl import FALSE, TRUE, AffineAtom, And, Atom, Interval, NegAtom, Or, Release, Until

VARS = ("x", "y")
HORIZON = 10.0


def random_atom(rng: np.random.Generator) -> AffineAtom:
    coeffs = {}
    while not coeffs:
        for v in VARS:
            c = float(rng.integers(-2, 3))
            if c:
                coeffs[v] = c
    return AffineAtom(coeffs, float(rng.uniform(-4, 4)))


def random_interval(rng: np.random.Generator) -> Interval:
    lo = float(rng.integers(0, 4))
    if rng.random() < 0.2:
        return Interval(lo, float("inf"))
    return Interval(lo, lo + float(rng.integers(1, 5)))


def random_formula(rng: np.random.Generator, depth: int = 3):
    if depth == 0 or rng.random() < 0.25:
        a = random_atom(rng)
        return Atom(a) if rng.random() < 0.6 else NegAtom(a)
    kind = int(rng.integers(0, 6))
    sub = lambda: random_formula(rng, depth - 1)  # noqa: E731
    if kind == 0:
        return And((sub(), sub()))
    if kind == 1:
        return Or((sub(), sub()))
    if kind == 2:
        return Until(random_interval(rng), sub(), sub())
    if kind == 3:
        return Release(random_interval(rng), sub(), sub())
    if kind == 4:
        return Until(random_interval(rng), TRUE, sub())
    return Release(random_interval(rng), FALSE, sub())


def random_trace(rng: np.random.Generator, n_cells: int | None = None) -> TimedStateSequence:
    n = n_cells or int(rng.integers(1, 9))
    inner = np.sort(rng.choice(np.arange(1, 100), size=n - 1, replace=False)) * HORIZON / 100
    gammas = np.concatenate([[0.0], inner, [HORIZON]])
    states = rng.uniform(-5, 5, size=(n + 1, len(VARS)))
    return TimedStateSequence(gammas, VARS, states)
