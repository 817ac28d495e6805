"""Deterministic report emission: canonical JSON, CSV, plot columns.

Identical inputs must yield byte-identical artifacts, so floats are
always formatted with 17 significant digits (round-trip exact for IEEE
doubles), dict keys keep insertion order, and newlines are always \\n.
Complex values are emitted as [re, im] pairs.
"""

from __future__ import annotations

import io
import math

__all__ = ["format_float", "canonical_json", "write_json", "write_csv",
           "write_plot", "MELNIKOV_CSV_HEADER"]

MELNIKOV_CSV_HEADER = ("t_re", "t_im", "M_re", "M_im", "quad_err")


def format_float(v: float) -> str:
    v = float(v)
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    if v == 0:
        v = 0.0  # normalize -0.0
    return format(v, ".17g")


def _emit(obj, out: list, indent: int, level: int):
    pad = " " * (indent * level)
    inner = " " * (indent * (level + 1))
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append(_escape(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif isinstance(obj, complex):
        out.append(f"[{format_float(obj.real)}, {format_float(obj.imag)}]")
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            if not isinstance(k, str):
                k = str(k)
            out.append(f"{inner}{_escape(k)}: ")
            _emit(v, out, indent, level + 1)
            out.append(",\n" if i + 1 < len(obj) else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        items = list(obj)
        if not items:
            out.append("[]")
            return
        simple = all(isinstance(v, (int, float, complex, str, bool, type(None)))
                     for v in items)
        if simple and len(items) <= 8:
            out.append("[")
            for i, v in enumerate(items):
                _emit(v, out, indent, level + 1)
                if i + 1 < len(items):
                    out.append(", ")
            out.append("]")
            return
        out.append("[\n")
        for i, v in enumerate(items):
            out.append(inner)
            _emit(v, out, indent, level + 1)
            out.append(",\n" if i + 1 < len(items) else "\n")
        out.append(pad + "]")
    else:
        to_dict = getattr(obj, "to_dict", None)
        if to_dict is None:
            raise TypeError(f"cannot serialize {type(obj).__name__}")
        _emit(to_dict(), out, indent, level)


_ESCAPES = {'"': '\\"', "\\": "\\\\", "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _escape(s: str) -> str:
    parts = ['"']
    for ch in s:
        if ch in _ESCAPES:
            parts.append(_ESCAPES[ch])
        elif ord(ch) < 0x20:
            parts.append(f"\\u{ord(ch):04x}")
        else:
            parts.append(ch)
    parts.append('"')
    return "".join(parts)


def canonical_json(obj, indent: int = 2) -> str:
    out: list = []
    _emit(obj, out, indent, 0)
    out.append("\n")
    return "".join(out)


def write_json(target, obj, indent: int = 2):
    text = canonical_json(obj, indent)
    if isinstance(target, (str, bytes)):
        with open(target, "w", newline="") as fh:
            fh.write(text)
    else:
        target.write(text)
    return text


def write_csv(target, rows, header=MELNIKOV_CSV_HEADER):
    """Rows of floats (any iterable of numbers), %.17g formatted."""
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(format_float(v) for v in row) + "\n")
    text = buf.getvalue()
    if isinstance(target, (str, bytes)):
        with open(target, "w", newline="") as fh:
            fh.write(text)
    else:
        target.write(text)
    return text


def write_plot(target, pairs):
    """Two-column `t M` plain text (real parts), gnuplot-ready."""
    buf = io.StringIO()
    for t, m in pairs:
        tv = t.real if isinstance(t, complex) else float(t)
        mv = m.real if isinstance(m, complex) else float(m)
        buf.write(f"{format_float(tv)} {format_float(mv)}\n")
    text = buf.getvalue()
    if isinstance(target, (str, bytes)):
        with open(target, "w", newline="") as fh:
            fh.write(text)
    else:
        target.write(text)
    return text
