"""Writer for the CPLEX-style LP text format."""
from __future__ import annotations

import re

from .model import EQ, GE, LE, MilpModel

_BAD = re.compile(r"[^A-Za-z0-9_]")
_LINE_WIDTH = 200


def _names(model: MilpModel) -> list:
    """Sanitized, unique variable names in handle order."""
    out, seen = [], set()
    for v in model.vars:
        base = _BAD.sub("_", v.name) or "v"
        if not (base[0].isalpha() or base[0] == "_"):
            base = "v_" + base
        name = base
        if name in seen:
            name = f"{base}__{v.id}"
        seen.add(name)
        out.append(name)
    return out


def _num(x: float) -> str:
    return repr(float(x) + 0.0)  # no "-0.0"


def _terms(pairs, names) -> list:
    parts = []
    for k, c in pairs:
        sign = "-" if c < 0 else "+"
        parts.append(f"{sign} {_num(abs(c))} {names[k]}")
    if parts and parts[0].startswith("+ "):
        parts[0] = parts[0][2:]
    if not parts and names:
        parts = ["0 " + names[0]]
    return parts


def _wrap(prefix: str, parts: list, suffix: str = "") -> list:
    lines, cur = [], prefix
    for p in parts:
        if len(cur) + len(p) + 1 > _LINE_WIDTH and cur.strip():
            lines.append(cur)
            cur = "   "
        cur += " " + p
    cur += suffix
    lines.append(cur)
    return lines


def export_lp(model: MilpModel) -> str:
    names = _names(model)
    out = [f"\\ {_BAD.sub('_', model.name)}", "Maximize"]
    obj = sorted(model.objective.terms.items())
    parts = _terms([(k, c) for k, c in obj if c != 0.0], names)
    if model.objective.const:
        c0 = model.objective.const
        parts.append(f"{'-' if c0 < 0 else '+'} {_num(abs(c0))}")
    out += _wrap(" obj:", parts)
    out.append("Subject To")
    op = {LE: "<=", GE: ">=", EQ: "="}
    for i, con in enumerate(model.constraints):
        out += _wrap(f" c{i}:", _terms(sorted(con.terms), names), f" {op[con.sense]} {_num(con.rhs)}")
    out.append("Bounds")
    for v, name in zip(model.vars, names):
        if v.lower == v.upper:
            out.append(f" {name} = {_num(v.lower)}")
        else:
            out.append(f" {_num(v.lower)} <= {name} <= {_num(v.upper)}")
    bins = [names[v.id] for v in model.vars if v.is_binary]
    if bins:
        out.append("Binary")
        out += [f" {b}" for b in bins]
    out.append("End")
    return "\n".join(out) + "\n"
