"""Piecewise-linear traces: time sequences, interpolation, resampling and APED."""
from __future__ import annotations

import csv
import io
import itertools
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

DEFAULT_APED_STEP = 0.02


class TimeSequence:
    """Strictly increasing partition points ``0 = g_0 < ... < g_N = T``."""

    __slots__ = ("gammas",)

    def __init__(self, gammas: Sequence[float]):
        g = np.asarray(gammas, dtype=float)
        if g.ndim != 1 or g.size < 2:
            raise ValueError("a time sequence needs at least two points")
        if g[0] != 0.0:
            raise ValueError("time sequence must start at 0")
        if not np.all(np.diff(g) > 0):
            raise ValueError("time sequence must be strictly increasing")
        g.setflags(write=False)
        self.gammas = g

    @property
    def horizon(self) -> float:
        return float(self.gammas[-1])

    @property
    def bound(self) -> int:
        return len(self.gammas) - 1

    def __len__(self):
        return len(self.gammas)

    def __eq__(self, other):
        return isinstance(other, TimeSequence) and np.array_equal(self.gammas, other.gammas)

    def __repr__(self):
        return f"TimeSequence({self.gammas.tolist()})"


class TimedStateSequence:
    """States ``x_0..x_N`` attached to a time sequence; columns follow ``variables``."""

    __slots__ = ("times", "variables", "states")

    def __init__(self, times, variables: Sequence[str], states):
        if not isinstance(times, TimeSequence):
            times = TimeSequence(times)
        x = np.array(states, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if x.shape != (len(times), len(variables)):
            raise ValueError(
                f"states must have shape ({len(times)}, {len(variables)}), got {x.shape}"
            )
        if len(set(variables)) != len(variables):
            raise ValueError("duplicate variable names")
        x.setflags(write=False)
        self.times = times
        self.variables = tuple(variables)
        self.states = x

    @property
    def horizon(self) -> float:
        return self.times.horizon

    @property
    def gammas(self) -> np.ndarray:
        return self.times.gammas

    def column(self, var: str) -> np.ndarray:
        return self.states[:, self.variables.index(var)]

    def values_at(self, t) -> np.ndarray:
        """Interpolated states at times ``t`` (array) -> shape ``(len(t), |V|)``.

        Times past the horizon get the final state; the interpolation weights
        are computed per cell so partition points reproduce ``x_i`` exactly.
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        g = self.gammas
        tc = np.clip(t, 0.0, g[-1])
        idx = np.clip(np.searchsorted(g, tc, side="right"), 1, len(g) - 1)
        g0, g1 = g[idx - 1], g[idx]
        lam = ((tc - g0) / (g1 - g0))[:, None]
        x0, x1 = self.states[idx - 1], self.states[idx]
        out = x0 + lam * (x1 - x0)  # exact on constant stretches
        exact_right = tc == g1
        out[exact_right] = x1[exact_right]
        exact_left = tc == g0
        out[exact_left] = x0[exact_left]
        return out

    def __eq__(self, other):
        return (
            isinstance(other, TimedStateSequence)
            and self.times == other.times
            and self.variables == other.variables
            and np.array_equal(self.states, other.states)
        )

    def __repr__(self):
        return f"TimedStateSequence(N={self.times.bound}, variables={self.variables})"


def pwl_value(ts: TimedStateSequence, t: float) -> np.ndarray:
    if t < 0:
        raise ValueError("time must be non-negative")
    return ts.values_at([t])[0]


def resample_times(horizon: float, step: float) -> np.ndarray:
    if not step > 0:
        raise ValueError("step must be positive")
    n = int(np.floor(horizon / step + 1e-9))
    grid = step * np.arange(n + 1)
    grid = grid[grid < horizon - 1e-12]
    return np.append(grid, horizon)


def resample(ts: TimedStateSequence, step: float = DEFAULT_APED_STEP):
    """Samples at ``0, step, 2*step, ...`` with the horizon always last."""
    times = resample_times(ts.horizon, step)
    return list(zip(times.tolist(), ts.values_at(times)))


@dataclass
class Trace:
    """A synthesized timed state sequence plus run metadata."""

    tss: TimedStateSequence
    benchmark: str = ""
    method: str = ""
    iteration: int = 0
    seed: Optional[int] = None
    bound: Optional[int] = None
    delta: Optional[float] = None
    objective: Optional[float] = None
    valuations: dict = field(default_factory=dict)
    reference: Optional[str] = None

    def __post_init__(self):
        if self.method.upper() == "RBD" and self.seed is None:
            raise ValueError("RBD traces must record their seed")

    @property
    def horizon(self) -> float:
        return self.tss.horizon

    @property
    def variables(self) -> tuple:
        return self.tss.variables

    def metadata(self) -> dict:
        meta = {
            "benchmark": self.benchmark,
            "method": self.method,
            "iteration": self.iteration,
            "seed": self.seed,
            "bound": self.bound,
            "delta": self.delta,
            "objective": self.objective,
            "gammas": [float(g) for g in self.tss.gammas],
            "valuations": {str(k): v for k, v in sorted(self.valuations.items())},
        }
        if self.reference is not None:
            meta["reference"] = self.reference
        return meta


def _check_compatible(traces: Sequence) -> None:
    first = traces[0]
    for tr in traces[1:]:
        if tr.variables != first.variables:
            raise ValueError("traces have different variable sets")
        if abs(tr.horizon - first.horizon) > 1e-9:
            raise ValueError("traces have different horizons")


def _tss(tr) -> TimedStateSequence:
    return tr.tss if isinstance(tr, Trace) else tr


def pairwise_distances(traces: Sequence, step: float = DEFAULT_APED_STEP) -> np.ndarray:
    """Matrix of time-integrated Euclidean distances between trace pairs."""
    tss = [_tss(t) for t in traces]
    if not tss:
        raise ValueError("need at least one trace")
    _check_compatible(tss)
    times = resample_times(tss[0].horizon, step)
    samples = [t.values_at(times) for t in tss]
    n = len(tss)
    out = np.zeros((n, n))
    for i, j in itertools.combinations(range(n), 2):
        gap = np.linalg.norm(samples[i] - samples[j], axis=1)
        out[i, j] = out[j, i] = np.trapezoid(gap, times)
    return out


def aped(traces: Sequence, step: float = DEFAULT_APED_STEP) -> float:
    """Aggregate pairwise Euclidean distance, trapezoidal rule on the resample grid."""
    d = pairwise_distances(traces, step)
    return float(np.sum(np.triu(d, 1)))


# ---------------------------------------------------------------- file formats

def _num(x: float) -> str:
    return repr(float(x))


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trace_csv_text(tss: TimedStateSequence) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", *tss.variables])
    for g, row in zip(tss.gammas, tss.states):
        w.writerow([_num(g), *(_num(v) for v in row)])
    return buf.getvalue()


def write_trace(trace: Trace, csv_path) -> Path:
    """Write ``<name>.csv`` and its ``<name>.json`` metadata sidecar."""
    csv_path = Path(csv_path)
    atomic_write_text(csv_path, trace_csv_text(trace.tss))
    atomic_write_text(
        csv_path.with_suffix(".json"), json.dumps(trace.metadata(), indent=2, sort_keys=True) + "\n"
    )
    return csv_path


def read_tss(csv_path) -> TimedStateSequence:
    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or not rows[0] or rows[0][0] != "t":
        raise ValueError(f"{csv_path}: header must start with 't'")
    header = rows[0]
    data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ValueError(f"{csv_path}: malformed rows")
    return TimedStateSequence(data[:, 0], header[1:], data[:, 1:])


def read_trace(csv_path) -> Trace:
    csv_path = Path(csv_path)
    tss = read_tss(csv_path)
    meta_path = csv_path.with_suffix(".json")
    if not meta_path.exists():
        return Trace(tss)
    meta = json.loads(meta_path.read_text())
    return Trace(
        tss,
        benchmark=meta.get("benchmark", ""),
        method=meta.get("method", ""),
        iteration=meta.get("iteration", 0),
        seed=meta.get("seed"),
        bound=meta.get("bound"),
        delta=meta.get("delta"),
        objective=meta.get("objective"),
        valuations={int(k): v for k, v in meta.get("valuations", {}).items()},
        reference=meta.get("reference"),
    )


def read_trace_dir(directory) -> list:
    files = sorted(p for p in Path(directory).glob("*.csv"))
    return [read_trace(p) for p in files]
