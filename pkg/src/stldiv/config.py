"""JSON configuration files for benchmarks and system models.

Schema (all numbers are JSON numbers)::

    {
      "id": "dstop",
      "variables": [{"name": "x", "lo": 0, "hi": 10, "unit": "m"}, ...],
      "init": {"x": [0, 0], ...},
      "dynamics": [
        {"kind": "input", "var": "a", "lo": -3, "hi": 3},        # lo/hi optional
        {"kind": "integrator", "state": "x", "rate": "v"},
        {"kind": "double_integrator", "pos": "x", "vel": "v", "acc": "a"},
        {"kind": "rha", "initial": ["l1"], "locations": [
            {"name": "l1", "flow": {"x": [1, 1]}, "invariant": {"x": [0, 5]}}]}
      ],
      "formula": "Ev(x >= 1)",
      "horizon": 20, "bound": 10, "delta": 0.01,
      "time_lattice": 50,          # optional
      "notes": "free text"         # optional
    }

ISO skeleton files instead carry ``"benchmark": "iso<i>"`` plus the three
subformula strings ``initialCondition``, ``behaviourSV`` and
``behaviourPOV``. Errors are reported with the line of the offending value.
"""
from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Annotated, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .stl.parser import ParseError, parse
from .system import (
    DoubleIntegrator,
    IntegratorLink,
    Location,
    PiecewiseConstantInput,
    RectangularAutomaton,
    SystemModel,
    Variable,
)


class ConfigError(ValueError):
    def __init__(self, message: str, source: str = "<config>", line: Optional[int] = None):
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")
        self.line = line


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


Range = Tuple[float, float]


class VariableCfg(_Strict):
    name: str = Field(pattern=r"^[A-Za-z_][A-Za-z0-9_]*$")
    lo: float
    hi: float
    unit: str = ""


class InputCfg(_Strict):
    kind: Literal["input"]
    var: str
    lo: Optional[float] = None
    hi: Optional[float] = None


class IntegratorCfg(_Strict):
    kind: Literal["integrator"]
    state: str
    rate: str


class DoubleIntegratorCfg(_Strict):
    kind: Literal["double_integrator"]
    pos: str
    vel: str
    acc: str


class LocationCfg(_Strict):
    name: str
    flow: Dict[str, Range]
    invariant: Dict[str, Range]


class RhaCfg(_Strict):
    kind: Literal["rha"]
    locations: List[LocationCfg] = Field(min_length=1)
    initial: List[str] = Field(min_length=1)


DynamicsCfg = Annotated[
    Union[InputCfg, IntegratorCfg, DoubleIntegratorCfg, RhaCfg], Field(discriminator="kind")
]


class ModelConfig(_Strict):
    id: str = ""
    variables: List[VariableCfg] = Field(min_length=1)
    init: Dict[str, Range] = {}
    dynamics: List[DynamicsCfg] = []
    formula: str
    horizon: float = Field(gt=0)
    bound: int = Field(ge=1)
    delta: float = Field(default=0.01, gt=0)
    time_lattice: Optional[int] = Field(default=None, ge=1)
    notes: str = ""

    @model_validator(mode="after")
    def _ranges(self):
        for v in self.variables:
            if v.lo > v.hi:
                raise ValueError(f"variable {v.name!r} has lo > hi")
        return self


class IsoConfig(_Strict):
    benchmark: str = Field(pattern=r"^iso[1-8]$")
    initialCondition: str
    behaviourSV: str
    behaviourPOV: str
    horizon: Optional[float] = Field(default=None, gt=0)
    bound: Optional[int] = Field(default=None, ge=1)
    delta: Optional[float] = Field(default=None, gt=0)


# ----------------------------------------------------------------- positions

_TOKEN = re.compile(r'\s*("(?:[^"\\]|\\.)*"|[{}\[\],:]|[^\s{}\[\],:]+)')


def _locate(text: str, path: tuple) -> Optional[int]:
    """1-based line of the JSON value at ``path`` (keys and list indices)."""
    toks = [(m.group(1), m.start(1)) for m in _TOKEN.finditer(text)]

    def skip(i):
        # index just past the value starting at toks[i]
        t = toks[i][0]
        if t in "{[":
            depth = 0
            while True:
                if toks[i][0] in "{[":
                    depth += 1
                elif toks[i][0] in "}]":
                    depth -= 1
                i += 1
                if depth == 0:
                    return i
        return i + 1

    i = 0
    found = toks[0][1] if toks else 0
    for key in path:
        if i >= len(toks):
            break
        open_tok = toks[i][0]
        if open_tok == "{" and isinstance(key, str):
            j = i + 1
            hit = None
            while j < len(toks) and toks[j][0] != "}":
                name = json.loads(toks[j][0]) if toks[j][0].startswith('"') else None
                val = j + 2
                if name == key:
                    hit = val
                    found = toks[j][1]
                    break
                j = skip(val)
                if j < len(toks) and toks[j][0] == ",":
                    j += 1
            if hit is None:
                break
            i = hit
            found = toks[i][1]
        elif open_tok == "[" and isinstance(key, int):
            j = i + 1
            for _ in range(key):
                j = skip(j)
                if j < len(toks) and toks[j][0] == ",":
                    j += 1
            if j >= len(toks) or toks[j][0] == "]":
                break
            i = j
            found = toks[i][1]
        else:
            break
    return text.count("\n", 0, found) + 1


def _validation_error(exc: ValidationError, text: str, source: str) -> ConfigError:
    err = exc.errors()[0]
    loc = tuple(p for p in err["loc"] if not (isinstance(p, str) and p in _DISCRIMINATED))
    path = ".".join(str(p) for p in loc) or "<root>"
    if err["type"] == "missing":
        msg = f"missing required key {loc[-1]!r}" + (f" in {'.'.join(map(str, loc[:-1]))}" if loc[:-1] else "")
        loc = loc[:-1]
    else:
        msg = f"{path}: {err['msg']}"
    return ConfigError(msg, source, _locate(text, loc))


_DISCRIMINATED = {"input", "integrator", "double_integrator", "rha"}


def _load_json(text: str, source: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (column {exc.colno})", source, exc.lineno) from None


def parse_model_config(text: str, source: str = "<config>") -> ModelConfig:
    data = _load_json(text, source)
    try:
        cfg = ModelConfig.model_validate(data)
    except ValidationError as exc:
        raise _validation_error(exc, text, source) from None
    names = [v.name for v in cfg.variables]
    try:
        parse(cfg.formula, names)
    except ParseError as exc:
        raise ConfigError(f"formula: {exc}", source, _locate(text, ("formula",))) from None
    try:
        system_from_config(cfg)
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc), source, _locate(text, ("dynamics",))) from None
    return cfg


def parse_iso_config(text: str, source: str = "<config>") -> IsoConfig:
    data = _load_json(text, source)
    try:
        return IsoConfig.model_validate(data)
    except ValidationError as exc:
        raise _validation_error(exc, text, source) from None


def read_config(path) -> Union[ModelConfig, IsoConfig]:
    """Read either config kind; ISO skeleton files are recognised by ``benchmark``."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read: {exc.strerror}", str(path)) from None
    data = _load_json(text, str(path))
    if isinstance(data, dict) and "benchmark" in data:
        return parse_iso_config(text, str(path))
    return parse_model_config(text, str(path))


# ----------------------------------------------------------------- conversion

def system_from_config(cfg: ModelConfig) -> SystemModel:
    variables = [Variable(v.name, v.lo, v.hi, v.unit) for v in cfg.variables]
    blocks = []
    for d in cfg.dynamics:
        if isinstance(d, InputCfg):
            blocks.append(PiecewiseConstantInput(d.var, d.lo, d.hi))
        elif isinstance(d, IntegratorCfg):
            blocks.append(IntegratorLink(d.state, d.rate))
        elif isinstance(d, DoubleIntegratorCfg):
            blocks.append(DoubleIntegrator(d.pos, d.vel, d.acc))
        else:
            locs = tuple(
                Location(l.name, dict(l.flow), dict(l.invariant)) for l in d.locations
            )
            blocks.append(RectangularAutomaton(locs, tuple(d.initial)))
    return SystemModel(variables, {k: tuple(v) for k, v in cfg.init.items()}, blocks)


def system_to_dict(system: SystemModel) -> dict:
    dyn = []
    for b in system.dynamics:
        if isinstance(b, PiecewiseConstantInput):
            d = {"kind": "input", "var": b.var}
            if b.lo is not None:
                d["lo"] = b.lo
            if b.hi is not None:
                d["hi"] = b.hi
        elif isinstance(b, IntegratorLink):
            d = {"kind": "integrator", "state": b.state, "rate": b.rate}
        elif isinstance(b, DoubleIntegrator):
            d = {"kind": "double_integrator", "pos": b.pos, "vel": b.vel, "acc": b.acc}
        else:
            d = {
                "kind": "rha",
                "initial": list(b.initial),
                "locations": [
                    {
                        "name": l.name,
                        "flow": {k: list(v) for k, v in l.flow.items()},
                        "invariant": {k: list(v) for k, v in l.invariant.items()},
                    }
                    for l in b.locations
                ],
            }
        dyn.append(d)
    return {
        "variables": [
            {"name": v.name, "lo": v.lo, "hi": v.hi, **({"unit": v.unit} if v.unit else {})}
            for v in system.variables
        ],
        "init": {k: list(v) for k, v in system.init.items()},
        "dynamics": dyn,
    }
