"""Self-contained SVG line plots of trace sets."""
from __future__ import annotations

from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

from .signal import DEFAULT_APED_STEP, atomic_write_text, resample_times

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")
W, H = 640, 360
ML, MR, MT, MB = 60, 120, 30, 40


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def svg_for_variable(traces: Sequence, var: str, step: float = DEFAULT_APED_STEP) -> str:
    """One SVG with a polyline per trace for variable ``var``."""
    horizon = traces[0].tss.horizon
    times = resample_times(horizon, step)
    series = [t.tss.values_at(times)[:, t.tss.variables.index(var)] for t in traces]
    lo = min(float(s.min()) for s in series)
    hi = max(float(s.max()) for s in series)
    if hi - lo < 1e-12:
        lo, hi = lo - 1.0, hi + 1.0
    pw, ph = W - ML - MR, H - MT - MB

    def px(t):
        return ML + pw * t / horizon

    def py(v):
        return MT + ph * (1.0 - (v - lo) / (hi - lo))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2:.0f}" y="18" text-anchor="middle" font-family="sans-serif" font-size="14">{escape(var)}</text>',
        f'<line x1="{ML}" y1="{MT + ph}" x2="{ML + pw}" y2="{MT + ph}" stroke="black"/>',
        f'<line x1="{ML}" y1="{MT}" x2="{ML}" y2="{MT + ph}" stroke="black"/>',
    ]
    for k in range(5):
        t = horizon * k / 4
        v = lo + (hi - lo) * k / 4
        out.append(f'<text x="{px(t):.1f}" y="{MT + ph + 16}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="10">{t:g}</text>')
        out.append(f'<text x="{ML - 4}" y="{py(v) + 3:.1f}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="10">{v:.3g}</text>')
    out.append(f'<text x="{ML + pw / 2:.0f}" y="{H - 6}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="11">t</text>')
    for k, (tr, s) in enumerate(zip(traces, series)):
        color = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{_fmt(px(t))},{_fmt(py(v))}" for t, v in zip(times, s))
        label = f"trace {tr.iteration or k + 1}"
        out.append(f'<g class="trace" id="trace{k + 1}">')
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = MT + 14 * k + 8
        out.append(f'<line x1="{W - MR + 10}" y1="{ly}" x2="{W - MR + 30}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{W - MR + 34}" y="{ly + 4}" font-family="sans-serif" font-size="11">{escape(label)}</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_plots(traces: Sequence, out_dir, step: float = DEFAULT_APED_STEP) -> list:
    if not traces:
        raise ValueError("no traces to plot")
    out_dir = Path(out_dir)
    paths = []
    for var in traces[0].tss.variables:
        p = out_dir / f"{var}.svg"
        atomic_write_text(p, svg_for_variable(traces, var, step))
        paths.append(p)
    return paths

