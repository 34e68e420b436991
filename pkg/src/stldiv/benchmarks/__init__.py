"""Built-in benchmark families: DSTOP, RNC1-3, NAV1-2 and the ISO skeleton.

Horizons, position ranges, initial ranges and the widened velocity bounds
are not fixed by the benchmark descriptions; the values here are defaults
that every config file may override.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..config import (
    ConfigError,
    IsoConfig,
    ModelConfig,
    read_config,
    system_from_config,
    system_to_dict,
)
from ..encoder import DEFAULT_DELTA, EncodingConfig
from ..stl import parse
from ..system import (
    DoubleIntegrator,
    Location,
    RectangularAutomaton,
    SystemModel,
    Variable,
)

CONFIG_DIR = Path(__file__).parent / "configs"


@dataclass(frozen=True)
class BenchmarkSpec:
    id: str
    system: SystemModel
    formula: str
    horizon: float
    bound: int = 10
    delta: float = DEFAULT_DELTA
    time_lattice: Optional[int] = None
    notes: str = ""

    def phi(self):
        return parse(self.formula, self.system.names)

    def encoding_config(self, bound: Optional[int] = None, delta: Optional[float] = None,
                        **kw) -> EncodingConfig:
        return EncodingConfig(
            bound=bound or self.bound,
            horizon=self.horizon,
            delta=delta or self.delta,
            time_lattice=self.time_lattice,
            **kw,
        )

    def to_dict(self) -> dict:
        d = {"id": self.id, **system_to_dict(self.system), "formula": self.formula,
             "horizon": self.horizon, "bound": self.bound, "delta": self.delta}
        if self.time_lattice is not None:
            d["time_lattice"] = self.time_lattice
        if self.notes:
            d["notes"] = self.notes
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_config(cls, cfg: ModelConfig) -> "BenchmarkSpec":
        return cls(cfg.id, system_from_config(cfg), cfg.formula, cfg.horizon, cfg.bound,
                   cfg.delta, cfg.time_lattice, cfg.notes)


# ----------------------------------------------------------------- two cars

def _two_cars(v_lo: float, v_hi: float) -> SystemModel:
    variables = [
        Variable("x_r", 0.0, 900.0, "m"),
        Variable("v_r", v_lo, v_hi, "m/s"),
        Variable("a_r", -3.0, 3.0, "m/s^2"),
        Variable("x_f", 0.0, 900.0, "m"),
        Variable("v_f", v_lo, v_hi, "m/s"),
        Variable("a_f", -3.0, 3.0, "m/s^2"),
    ]
    init = {
        "x_r": (0.0, 0.0),
        "x_f": (0.0, 100.0),
        "v_r": (max(v_lo, 0.0), v_hi),
        "v_f": (max(v_lo, 0.0), v_hi),
    }
    dyn = [DoubleIntegrator("x_r", "v_r", "a_r"), DoubleIntegrator("x_f", "v_f", "a_f")]
    return SystemModel(variables, init, dyn)


LEAD = "x_f - x_r >= 0"
CLOSE = "x_f - x_r <= 10"
FAR = "x_f - x_r >= 40"
DANGER = "x_f - x_r <= 10"
DYN_INV = "(x_f - x_r >= 0 && v_f >= 2 && v_f <= 27 && v_r >= 2 && v_r <= 27)"
TRIMMING = f"(Ev({DANGER}) -> ((Alw[0,0.2](a_r >= 0.5)) U ({DANGER})))"
TRIMMING2 = f"(Ev({DANGER}) -> ((Alw[0,1](a_r >= 1)) U ({DANGER})))"


def dstop() -> BenchmarkSpec:
    formula = (
        f"Alw({LEAD}) && Alw[0,2]({FAR}) && "
        f"((Ev[0,10]({CLOSE})) U[10,15] (v_f <= 0 || v_r <= 0))"
    )
    return BenchmarkSpec(
        "dstop", _two_cars(-5.0, 30.0), formula, horizon=25.0,
        notes="velocities may go slightly negative so the tightened stop atom v <= 0 is attainable",
    )


def rnc(variant: int) -> BenchmarkSpec:
    if variant == 1:
        formula = f"Alw({DYN_INV} && {TRIMMING}) && Ev[0,9](Alw[0,1]({DANGER}))"
    elif variant == 2:
        formula = (
            f"Alw({LEAD}) && Ev[0,9]((Alw[0,1]({DANGER})) && (Alw[0,1](a_r >= 1)) "
            f"&& (Ev[1,5](!({DANGER}))))"
        )
    elif variant == 3:
        formula = f"Alw({DYN_INV} && {TRIMMING2}) && Ev[0,9](Alw[0,1]({DANGER}))"
    else:
        raise ValueError(f"RNC variant must be 1, 2 or 3, got {variant!r}")
    return BenchmarkSpec(
        f"rnc{variant}", _two_cars(0.0, 30.0), formula, horizon=15.0,
        notes="velocity bounds widened to [0,30]; the 2..27 band is part of the formula",
    )


# ----------------------------------------------------------------- navigation

GOAL = (4.0, 6.0, 2.0, 5.0)
UNSAFE = (9.0, 10.0, 0.0, 10.0)


def box(x0, x1, y0, y1) -> str:
    return f"(x >= {x0:g} && x <= {x1:g} && y >= {y0:g} && y <= {y1:g})"


def nav_system() -> SystemModel:
    locs = (
        Location("l1", {"x": (1.0, 1.0), "y": (0.1, 2.0)}, {"x": (0.0, 5.0), "y": (5.0, 10.0)}),
        Location("l2", {"x": (0.1, 2.0), "y": (-1.0, -1.0)}, {"x": (5.0, 10.0), "y": (4.0, 10.0)}),
        Location("l3", {"x": (-1.0, -1.0), "y": (-2.0, -0.1)}, {"x": (5.0, 10.0), "y": (0.0, 4.0)}),
        Location("l4", {"x": (-2.0, -0.1), "y": (1.0, 1.0)}, {"x": (0.0, 5.0), "y": (0.0, 5.0)}),
    )
    return SystemModel(
        [Variable("x", 0.0, 10.0), Variable("y", 0.0, 10.0)],
        {"x": (0.0, 3.0), "y": (0.0, 0.0)},
        [RectangularAutomaton(locs, ("l4",))],
    )


def nav(variant: int) -> BenchmarkSpec:
    if variant == 1:
        formula = f"Ev(Alw[0,3]({box(*GOAL)})) && Alw(!({box(*UNSAFE)}))"
    elif variant == 2:
        formula = f"Alw({box(5, 10, 0, 4)} -> Ev[0,3]({box(0, 5, 0, 5)}))"
    else:
        raise ValueError(f"NAV variant must be 1 or 2, got {variant!r}")
    return BenchmarkSpec(f"nav{variant}", nav_system(), formula, horizon=20.0)


# ----------------------------------------------------------------- ISO skeleton

ISO_IDS = (1, 3, 4, 5, 6, 7, 8)
ISO_KEYS = ("initialCondition", "behaviourSV", "behaviourPOV")
INIT_SAFE = "x_f - x_r >= 10"


def iso_skeleton(i: int, subformulas: Optional[dict] = None, horizon: float = 15.0,
                 bound: int = 10, delta: float = DEFAULT_DELTA) -> BenchmarkSpec:
    """``initSafe && initialCondition_i && behaviourSV_i && behaviourPOV_i``.

    The three scenario subformulas are DSL strings supplied by the caller.
    """
    if i not in ISO_IDS:
        raise ValueError(f"ISO scenario must be one of {ISO_IDS}, got {i!r}")
    if subformulas is None:
        raise ConfigError(f"missing ISO subformulas; need keys {list(ISO_KEYS)}", f"iso{i}")
    for key in ISO_KEYS:
        if key not in subformulas:
            raise ConfigError(f"missing required key {key!r}", f"iso{i}")
    parts = [INIT_SAFE] + [subformulas[k] for k in ISO_KEYS]
    formula = " && ".join(f"({p})" for p in parts)
    return BenchmarkSpec(
        f"iso{i}", _two_cars(0.0, 30.0), formula, horizon=horizon, bound=bound, delta=delta,
        notes="initSafe is a default gap requirement at time 0",
    )


def from_iso_config(cfg: IsoConfig) -> BenchmarkSpec:
    i = int(cfg.benchmark[3:])
    kw = {k: getattr(cfg, k) for k in ("horizon", "bound", "delta") if getattr(cfg, k) is not None}
    return iso_skeleton(i, {k: getattr(cfg, k) for k in ISO_KEYS}, **kw)


# ----------------------------------------------------------------- registry

BUILTIN = {
    "dstop": dstop,
    "rnc1": lambda: rnc(1),
    "rnc2": lambda: rnc(2),
    "rnc3": lambda: rnc(3),
    "nav1": lambda: nav(1),
    "nav2": lambda: nav(2),
}


def benchmark_ids() -> list:
    return sorted(p.stem for p in CONFIG_DIR.glob("*.json"))


def load_config_file(path) -> BenchmarkSpec:
    cfg = read_config(path)
    if isinstance(cfg, IsoConfig):
        return from_iso_config(cfg)
    spec = BenchmarkSpec.from_config(cfg)
    if not spec.id:
        spec = BenchmarkSpec(Path(path).stem, *[getattr(spec, f) for f in
                             ("system", "formula", "horizon", "bound", "delta",
                              "time_lattice", "notes")])
    return spec


def get_benchmark(name: str) -> BenchmarkSpec:
    """Resolve a benchmark id through the bundled config directory."""
    path = CONFIG_DIR / f"{name.lower()}.json"
    if not path.exists():
        raise KeyError(f"unknown benchmark {name!r}; known: {', '.join(benchmark_ids())}")
    return load_config_file(path)


def write_builtin_configs(directory: Path = CONFIG_DIR) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for name, ctor in BUILTIN.items():
        (directory / f"{name}.json").write_text(ctor().to_json())
