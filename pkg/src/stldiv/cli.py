"""Command-line interface.

Exit codes: 0 success, 1 usage or input error, 2 no sound trace produced
(``run``) or formula violated (``monitor``).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .benchmarks import get_benchmark, load_config_file
from .config import ConfigError
from .diversity import METHODS, synthesize
from .encoder import EncodingConfig, encode
from .milp import ENGINES, export_lp
from .plot import write_plots
from .signal import DEFAULT_APED_STEP, atomic_write_text, pairwise_distances, read_trace, read_trace_dir, write_trace
from .stl import eval_boolean, eval_robust, falsifying_time, parse, tighten

EXIT_OK, EXIT_USAGE, EXIT_NO_TRACE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _seed(text):
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _add_source(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--benchmark", help="built-in benchmark id (dstop, rnc1-3, nav1-2)")
    g.add_argument("--config", type=Path, help="benchmark/model JSON config file")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="stldiv", description="Diverse STL trace synthesis via MILP.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="synthesize a set of diverse traces")
    _add_source(r)
    r.add_argument("--method", choices=METHODS, default="bd")
    r.add_argument("--traces", type=_positive_int, default=8, help="number of traces m")
    r.add_argument("--bound", type=_positive_int, help="variability bound N")
    r.add_argument("--delta", type=_positive_float, help="tightening margin")
    r.add_argument("--timeout", type=_positive_float, default=120.0, help="seconds per trace")
    r.add_argument("--seed", type=_seed, default=0)
    r.add_argument("--out", type=Path, default=Path("out"))
    r.add_argument("--step", type=_positive_float, default=DEFAULT_APED_STEP, help="APED resample step")
    r.add_argument("--solver", choices=("builtin", "export"), default="builtin",
                   help="solve in-process, or only write the first-iteration LP file")
    r.add_argument("--engine", choices=ENGINES, default="auto",
                   help="in-process MILP engine (auto picks by model size)")
    r.add_argument("--distinct", action="store_true", help="SP: exclude previous valuations")

    a = sub.add_parser("aped", help="aggregate pairwise Euclidean distance of a trace directory")
    a.add_argument("dir", type=Path)
    a.add_argument("--step", type=_positive_float, default=DEFAULT_APED_STEP)

    m = sub.add_parser("monitor", help="check a trace file against a formula")
    m.add_argument("trace", type=Path)
    src = m.add_mutually_exclusive_group(required=True)
    src.add_argument("--formula", help="formula text")
    src.add_argument("--benchmark")
    src.add_argument("--config", type=Path)
    m.add_argument("--delta", type=_positive_float, help="check the tightened formula instead")
    m.add_argument("--step", type=_positive_float, default=0.01)

    e = sub.add_parser("export-lp", help="write the encoded MILP in LP format")
    _add_source(e)
    e.add_argument("--bound", type=_positive_int)
    e.add_argument("--delta", type=_positive_float)
    e.add_argument("--out", type=Path, required=True)

    pl = sub.add_parser("plot", help="write one SVG per variable for a trace directory")
    pl.add_argument("dir", type=Path)
    pl.add_argument("--out", type=Path, help="output directory (default: the trace directory)")
    pl.add_argument("--step", type=_positive_float, default=DEFAULT_APED_STEP)
    return p


def _spec(args):
    try:
        if args.benchmark:
            return get_benchmark(args.benchmark)
        return load_config_file(args.config)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    except ConfigError as exc:
        raise UsageError(str(exc)) from None


def _err(msg: str) -> None:
    print(f"stldiv: {msg}", file=sys.stderr)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_run(args) -> int:
    spec = _spec(args)
    out: Path = args.out
    if args.solver == "export":
        cfg = spec.encoding_config(bound=args.bound, delta=args.delta)
        model, _ = encode(spec.system, spec.phi(), cfg)
        path = out / f"{spec.id}.lp"
        atomic_write_text(path, export_lp(model))
        print(path)
        return EXIT_OK

    def report(it):
        msg = f"iteration {it.index}: {it.status}"
        if it.objective is not None:
            msg += f", objective {it.objective:.6g}"
        msg += f" ({it.wall_time:.1f}s)"
        if it.message:
            msg += f"; {it.message}"
        _err(msg)

    run = synthesize(spec, args.method, args.traces, seed=args.seed, timeout=args.timeout,
                     bound=args.bound, delta=args.delta, engine=args.engine,
                     distinct=args.distinct, on_iteration=report)
    rows, timings = [], []
    for it in run.iterations:
        row = {"iteration": it.index, "status": it.status, "objective": it.objective, "trace": None}
        if it.reference is not None:
            row["reference"] = it.reference
        if it.ok:
            name = f"trace_{it.index:02d}.csv"
            write_trace(it.trace, out / name)
            row["trace"] = name
        if it.message:
            row["message"] = it.message
        rows.append(row)
        timings.append({"iteration": it.index, "wall_seconds": round(it.wall_time, 3)})
    summary = {
        "benchmark": run.benchmark,
        "method": run.method,
        "seed": run.seed,
        "N": run.bound,
        "delta": run.delta,
        "timeout": run.timeout,
        "step": args.step,
        "traces_requested": args.traces,
        "traces_produced": len(run.traces),
        "aped": run.aped(args.step),
        "iterations": rows,
    }
    atomic_write_text(out / "summary.json", _dump(summary))
    atomic_write_text(out / "timings.json", _dump({"iterations": timings}))
    print(f"{len(run.traces)}/{args.traces} traces, APED {summary['aped']:.6g}, written to {out}")
    if not run.traces:
        _err("no sound trace was produced")
        return EXIT_NO_TRACE
    return EXIT_OK


def _load_dir(d: Path) -> list:
    if not d.is_dir():
        raise UsageError(f"{d} is not a directory")
    traces = read_trace_dir(d)
    if not traces:
        raise UsageError(f"{d} contains no trace CSV files")
    return traces


def cmd_aped(args) -> int:
    traces = _load_dir(args.dir)
    try:
        dist = pairwise_distances(traces, args.step)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    total = float(np.sum(np.triu(dist, 1)))
    print(f"APED {total!r}")
    for row in dist:
        print(" ".join(f"{v:.6g}" for v in row))
    return EXIT_OK


def cmd_monitor(args) -> int:
    try:
        trace = read_trace(args.trace)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read trace: {exc}") from None
    if args.formula is not None:
        try:
            phi = parse(args.formula, trace.variables)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        phi = _spec(args).phi()
    if args.delta is not None:
        phi = tighten(phi, args.delta)
    try:
        sat = eval_boolean(trace.tss, phi, 0.0, args.step)
        rob = eval_robust(trace.tss, phi, 0.0, args.step)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    if sat:
        print(f"SAT robustness {rob!r}")
        return EXIT_OK
    t = falsifying_time(trace.tss, phi, 0.0, args.step)
    print(f"UNSAT robustness {rob!r} falsified at t={t!r}")
    return EXIT_NO_TRACE


def cmd_export_lp(args) -> int:
    spec = _spec(args)
    cfg: EncodingConfig = spec.encoding_config(bound=args.bound, delta=args.delta)
    model, handles = encode(spec.system, spec.phi(), cfg)
    atomic_write_text(args.out, export_lp(model))
    print(f"{args.out}: {model.num_vars} variables ({len(model.binaries())} binary), "
          f"{len(model.constraints)} constraints, {len(handles.valuation)} valuation bits")
    return EXIT_OK


def cmd_plot(args) -> int:
    traces = _load_dir(args.dir)
    try:
        paths = write_plots(traces, args.out or args.dir, args.step)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    for p in paths:
        print(p)
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "aped": cmd_aped,
    "monitor": cmd_monitor,
    "export-lp": cmd_export_lp,
    "plot": cmd_plot,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except OSError as exc:
        _err(f"I/O error: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
