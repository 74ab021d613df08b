"""CSV ingestion and emission, number parsing, and deterministic JSON reports.

Three CSV schemas are supported, each with a mandatory header row:

* points: ``x1,...,xd``
* pairs: ``x1,...,xd,y1,...,yd``
* trajectory: ``t,x1,...,xd``

Complex coordinates are written in Python's ``complex`` notation, e.g.
``(0.3+0.2j)``.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError

__all__ = [
    "parse_number",
    "format_number",
    "ingest_points",
    "ingest_pairs",
    "ingest_trajectory",
    "emit_points",
    "emit_pairs",
    "emit_trajectory",
    "emit_table",
    "Trajectory",
    "to_jsonable",
    "dumps_report",
    "write_report",
]


def parse_number(v):
    """Parse a real or complex scalar from text, a number, or ``{"re": .., "im": ..}``."""
    if isinstance(v, bool):
        raise ValueError(f"not a number: {v!r}")
    if isinstance(v, (int, float, complex, np.number)):
        return v.item() if isinstance(v, np.number) else v
    if isinstance(v, dict) and set(v) <= {"re", "im"}:
        re, im = float(v.get("re", 0.0)), float(v.get("im", 0.0))
        return complex(re, im) if im != 0 else re
    if isinstance(v, str):
        s = v.strip()
        try:
            return float(s)
        except ValueError:
            pass
        try:
            c = complex(s.replace(" ", ""))
        except ValueError:
            raise ValueError(f"not a number: {v!r}") from None
        return c.real if c.imag == 0 else c
    raise ValueError(f"not a number: {v!r}")


def format_number(v) -> str:
    """17-significant-digit text for reals, ``(re+imj)`` form for complex values."""
    if isinstance(v, (complex, np.complexfloating)):
        v = complex(v)
        if v.imag == 0:
            return format(v.real, ".17g")
        sign = "+" if v.imag >= 0 or math.isnan(v.imag) else "-"
        return f"({format(v.real, '.17g')}{sign}{format(abs(v.imag), '.17g')}j)"
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".17g")


def _read_rows(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", path=path) from None
    rows = list(csv.reader(_io.StringIO(text)))
    # drop trailing blank lines
    while rows and not any(c.strip() for c in rows[-1]):
        rows.pop()
    if not rows:
        raise ParseError("empty file; a header row is required", path=path, line=1)
    return path, [c.strip() for c in rows[0]], rows[1:]


def _parse_table(path, header, rows):
    width = len(header)
    out = []
    for r, row in enumerate(rows, start=2):
        if len(row) != width:
            raise ParseError(f"expected {width} cells, found {len(row)}", path=path, line=r)
        vals = []
        for c, cell in enumerate(row, start=1):
            try:
                vals.append(parse_number(cell))
            except ValueError:
                raise ParseError(f"non-numeric cell {cell!r}", path=path, line=r, column=c) from None
        out.append(vals)
    arr = np.array(out, dtype=complex if any(isinstance(v, complex) for r in out for v in r) else float)
    return arr.reshape(len(out), width)


def _expect_header(path, header, expected):
    if header != expected:
        col = next((i + 1 for i, (a, b) in enumerate(zip(header, expected)) if a != b),
                   min(len(header), len(expected)) + 1)
        raise ParseError(
            f"header {','.join(header)!r} does not match expected {','.join(expected)!r}",
            path=path, line=1, column=col,
        )


def _coord_names(prefix, d):
    return [f"{prefix}{i + 1}" for i in range(d)]


def ingest_points(path) -> np.ndarray:
    """Read a points file with header ``x1..xd``; returns an ``(n, d)`` array."""
    path, header, rows = _read_rows(path)
    d = len(header)
    _expect_header(path, header, _coord_names("x", d))
    return _parse_table(path, header, rows)


def ingest_pairs(path):
    """Read a pairs file with header ``x1..xd,y1..yd``; returns ``(X, Y)``.

    Duplicate source rows are rejected.
    """
    path, header, rows = _read_rows(path)
    if len(header) % 2:
        raise ParseError("pairs header needs an even number of columns", path=path, line=1)
    d = len(header) // 2
    _expect_header(path, header, _coord_names("x", d) + _coord_names("y", d))
    data = _parse_table(path, header, rows)
    X, Y = data[:, :d], data[:, d:]
    seen = {}
    for i, x in enumerate(X):
        key = tuple(x.tolist())
        if key in seen:
            raise ParseError(
                f"duplicate source row (same x as line {seen[key]})", path=path, line=i + 2
            )
        seen[key] = i + 2
    return X, Y


@dataclass(frozen=True)
class Trajectory:
    """Time series ``t`` with states ``x``; ``monotone`` is False when ``t`` ever decreases."""

    t: np.ndarray
    x: np.ndarray
    monotone: bool

    @property
    def warnings(self):
        return [] if self.monotone else ["non-monotone time column"]


def ingest_trajectory(path) -> Trajectory:
    """Read a trajectory file with header ``t,x1..xd``."""
    path, header, rows = _read_rows(path)
    d = len(header) - 1
    if d < 1:
        raise ParseError("trajectory header needs t and at least one coordinate", path=path, line=1)
    _expect_header(path, header, ["t"] + _coord_names("x", d))
    data = _parse_table(path, header, rows)
    if data.dtype.kind == "c":
        if np.any(data[:, 0].imag != 0):
            raise ParseError("time column must be real", path=path, column=1)
        t = data[:, 0].real
    else:
        t = data[:, 0]
    return Trajectory(t, data[:, 1:], bool(np.all(np.diff(t) >= 0)))


def _write_rows(path, header, rows):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_number(v) for v in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def emit_table(header, rows, path=None) -> str:
    """Write an arbitrary numeric table with the given header; returns the CSV text."""
    return _write_rows(path, list(header), rows)


def _as_table(X):
    X = np.asarray(X)
    return X.reshape(-1, 1) if X.ndim == 1 else X


def emit_points(X, path=None) -> str:
    """Write points in the ``x1..xd`` schema; returns the CSV text."""
    X = _as_table(X)
    return _write_rows(path, _coord_names("x", X.shape[1]), X.tolist())


def emit_pairs(X, Y, path=None) -> str:
    X, Y = _as_table(X), _as_table(Y)
    d = X.shape[1]
    rows = [list(a) + list(b) for a, b in zip(X.tolist(), Y.tolist())]
    return _write_rows(path, _coord_names("x", d) + _coord_names("y", d), rows)


def emit_trajectory(t, X, path=None) -> str:
    X = _as_table(X)
    rows = [[tt] + list(x) for tt, x in zip(np.asarray(t).tolist(), X.tolist())]
    return _write_rows(path, ["t"] + _coord_names("x", X.shape[1]), rows)


# -- JSON reports ------------------------------------------------------------


def to_jsonable(obj):
    """Convert numpy/complex values to plain JSON types, complex as ``{"re", "im"}``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": to_jsonable(float(obj.real)), "im": to_jsonable(float(obj.imag))}
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def dumps_report(report: dict) -> str:
    """Serialize with fixed field order and 17-significant-digit floats."""
    return _dump(to_jsonable(report), 0) + "\n"


def _dump(obj, level):
    pad = "  " * (level + 1)
    end = "  " * level
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_dump(v, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        items = [f"{pad}{_dump(v, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, float):
        return format(obj, ".17g") if math.isfinite(obj) else json.dumps(str(obj))
    return json.dumps(obj, ensure_ascii=False)


def write_report(report: dict, path) -> str:
    text = dumps_report(report)
    Path(path).write_text(text)
    return text
