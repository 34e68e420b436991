"""System models: bounded variables plus dynamics blocks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union


@dataclass(frozen=True)
class Variable:
    name: str
    lo: float
    hi: float
    unit: str = ""

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError(f"variable {self.name!r} needs finite bounds")
        if self.lo > self.hi:
            raise ValueError(f"variable {self.name!r} has lo > hi")


@dataclass(frozen=True)
class PiecewiseConstantInput:
    """An input held constant on every cell; bounds default to the variable's."""

    var: str
    lo: Optional[float] = None
    hi: Optional[float] = None


@dataclass(frozen=True)
class IntegratorLink:
    """``d/dt state = rate``; ``rate`` is a state (piecewise linear) or an input."""

    state: str
    rate: str


@dataclass(frozen=True)
class DoubleIntegrator:
    """``pos' = vel, vel' = acc`` with ``acc`` a piecewise-constant input."""

    pos: str
    vel: str
    acc: str

    def expand(self) -> tuple:
        return (
            PiecewiseConstantInput(self.acc),
            IntegratorLink(self.vel, self.acc),
            IntegratorLink(self.pos, self.vel),
        )


@dataclass(frozen=True)
class Location:
    name: str
    flow: Mapping[str, tuple]  # variable -> (rate lo, rate hi)
    invariant: Mapping[str, tuple]  # variable -> (lo, hi)


@dataclass(frozen=True)
class RectangularAutomaton:
    """Locations with constant-rate flow intervals and box invariants.

    A location switch may happen at any partition point lying in both boxes.
    """

    locations: tuple
    initial: tuple  # names of admissible initial locations

    def location(self, name: str) -> Location:
        for loc in self.locations:
            if loc.name == name:
                return loc
        raise KeyError(name)

    @property
    def variables(self) -> tuple:
        seen = []
        for loc in self.locations:
            for v in list(loc.flow) + list(loc.invariant):
                if v not in seen:
                    seen.append(v)
        return tuple(seen)


Block = Union[PiecewiseConstantInput, IntegratorLink, DoubleIntegrator, RectangularAutomaton]


@dataclass(frozen=True)
class SystemModel:
    variables: tuple
    init: Mapping[str, tuple] = field(default_factory=dict)
    dynamics: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "dynamics", tuple(self.dynamics))
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names")
        known = set(names)
        for name, (lo, hi) in self.init.items():
            if name not in known:
                raise ValueError(f"initial range for undeclared variable {name!r}")
            var = self.var(name)
            if lo > hi or lo < var.lo - 1e-12 or hi > var.hi + 1e-12:
                raise ValueError(f"initial range of {name!r} must lie inside its bounds")
        for blk in self.dynamics:
            for ref in _refs(blk):
                if ref not in known:
                    raise ValueError(f"{type(blk).__name__} references undeclared variable {ref!r}")
            if isinstance(blk, RectangularAutomaton):
                self._check_rha(blk)

    def _check_rha(self, rha: RectangularAutomaton) -> None:
        if not rha.initial:
            raise ValueError("automaton needs at least one initial location")
        for name in rha.initial:
            loc = rha.location(name)
            for v, (lo, hi) in self.init.items():
                if v in loc.invariant:
                    blo, bhi = loc.invariant[v]
                    if lo < blo - 1e-12 or hi > bhi + 1e-12:
                        raise ValueError(
                            f"initial range of {v!r} is not covered by the invariant of {name!r}"
                        )

    @property
    def names(self) -> tuple:
        return tuple(v.name for v in self.variables)

    def var(self, name: str) -> Variable:
        for v in self.variables:
            if v.name == name:
                return v
        raise KeyError(name)

    def blocks(self) -> list:
        """Dynamics with double integrators expanded into their parts."""
        out = []
        for blk in self.dynamics:
            out.extend(blk.expand() if isinstance(blk, DoubleIntegrator) else (blk,))
        return out

    def inputs(self) -> dict:
        return {b.var: b for b in self.blocks() if isinstance(b, PiecewiseConstantInput)}

    def integrators(self) -> list:
        return [b for b in self.blocks() if isinstance(b, IntegratorLink)]

    def automata(self) -> list:
        return [b for b in self.blocks() if isinstance(b, RectangularAutomaton)]


def _refs(blk) -> Sequence[str]:
    if isinstance(blk, PiecewiseConstantInput):
        return (blk.var,)
    if isinstance(blk, IntegratorLink):
        return (blk.state, blk.rate)
    if isinstance(blk, DoubleIntegrator):
        return (blk.pos, blk.vel, blk.acc)
    if isinstance(blk, RectangularAutomaton):
        return blk.variables
    raise TypeError(f"unknown dynamics block {blk!r}")
