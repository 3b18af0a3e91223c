"""Deterministic JSON/CSV writers.

Floats are written with 17 significant digits so files round-trip exactly
and identical runs hash identically. Key order is preserved as given.
"""

from __future__ import annotations

import csv
import json
import math
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any


def format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    s = format(x, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


_encode_str = json.encoder.encode_basestring


def _encode(obj: Any, out: list[str], indent: int, level: int, memo: dict) -> None:
    kind = type(obj)
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif kind is float or isinstance(obj, float):
        out.append(format_float(obj))
    elif kind is int or isinstance(obj, int):
        out.append(str(int(obj)))
    elif kind is str or isinstance(obj, str):
        out.append(_encode_str(obj))
    elif isinstance(obj, (Mapping, list, tuple)):
        # containers shared between records are encoded once
        key = (id(obj), level)
        cached = memo.get(key)
        if cached is None:
            buf: list[str] = []
            _encode_container(obj, buf, indent, level, memo)
            cached = memo[key] = ("".join(buf), obj)
        out.append(cached[0])
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def _encode_container(obj: Any, out: list[str], indent: int, level: int, memo: dict) -> None:
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = "," if indent else ", "
    if isinstance(obj, Mapping):
        if not obj:
            out.append("{}")
            return
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(sep)
            out.append(pad)
            out.append(_encode_str(str(k)))
            out.append(": ")
            _encode(v, out, indent, level + 1, memo)
        out.append(end + "}")
    else:
        if not obj:
            out.append("[]")
            return
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(sep)
            out.append(pad)
            _encode(v, out, indent, level + 1, memo)
        out.append(end + "]")


def dumps(obj: Any, indent: int = 0) -> str:
    """JSON text with 17-significant-digit floats and insertion-ordered keys."""
    out: list[str] = []
    _encode(obj, out, indent, 0, {})
    return "".join(out)


def write_json(path: Path, obj: Any, indent: int = 0) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj, indent))
        fh.write("\n")


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v)
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Mapping[str, Any]]) -> None:
    """Comma-separated, header first, LF endings; cells follow ``header`` order."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(row[key]) for key in header])
