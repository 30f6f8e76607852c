"""Count-file ingestion and report/CSV emission.

Count files are CSV with either a ``label,count`` pair per row or a single
count column. A header row and ``#`` comment lines are allowed. Labels may be
integer indices or ISO dates; either way the bins must be contiguous unless
gaps are zero-filled explicitly.
"""
from __future__ import annotations

import csv
import datetime as dt
import io
import json
import math
from importlib import resources

import numpy as np

from .simulation import BinCountSeries

__all__ = [
    "IngestError",
    "load_counts",
    "parse_counts",
    "format_counts_csv",
    "format_columns_csv",
    "dump_json",
    "load_schema",
    "package_version",
]


class IngestError(ValueError):
    pass


def _parse_count(text: str, lineno: int) -> int:
    text = text.strip()
    try:
        value = int(text)
    except ValueError:
        try:
            x = float(text)
        except ValueError:
            raise IngestError(f"line {lineno}: count {text!r} is not a number") from None
        if not (math.isfinite(x) and x.is_integer()):
            raise IngestError(f"line {lineno}: count {text!r} is not an integer")
        value = int(x)
    if value < 0:
        raise IngestError(f"line {lineno}: negative count {value}")
    return value


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _label_positions(labels, lines):
    """Integer bin positions for the labels, or ``None`` if they are free text."""
    try:
        idx = [int(s) for s in labels]
    except ValueError:
        idx = None
    if idx is not None:
        return idx, "index"
    try:
        dates = [dt.date.fromisoformat(s) for s in labels]
    except ValueError:
        return None, "text"
    ordinals = [d.toordinal() for d in dates]
    steps = np.diff(ordinals)
    if len(steps) == 0:
        return [0], "date"
    step = int(np.min(steps))
    if step <= 0:
        k = int(np.argmin(steps)) + 1
        raise IngestError(f"line {lines[k]}: dates are not increasing")
    bad = [k for k, s in enumerate(steps) if s % step]
    if bad:
        raise IngestError(f"line {lines[bad[0] + 1]}: date {labels[bad[0] + 1]} is off the {step}-day grid")
    return [(o - ordinals[0]) // step for o in ordinals], "date"


def parse_counts(text: str, delta: float, fill_gaps: bool = False) -> BinCountSeries:
    """Parse count-file contents; see :func:`load_counts`."""
    rows, lines = [], []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        rows.append([c.strip() for c in row])
        lines.append(lineno)
    if rows and not _is_number(rows[0][-1]):
        rows, lines = rows[1:], lines[1:]
    if not rows:
        raise IngestError("no count rows found")
    width = len(rows[0])
    if width not in (1, 2):
        raise IngestError(f"line {lines[0]}: expected 1 or 2 columns, got {width}")
    for row, ln in zip(rows, lines):
        if len(row) != width:
            raise IngestError(f"line {ln}: expected {width} columns, got {len(row)}")
    counts = [_parse_count(r[-1], ln) for r, ln in zip(rows, lines)]
    if width == 1:
        return BinCountSeries(np.array(counts, dtype=np.int64), float(delta))

    labels = [r[0] for r in rows]
    pos, _ = _label_positions(labels, lines)
    if pos is None:
        if len(set(labels)) != len(labels):
            raise IngestError("duplicate labels")
        return BinCountSeries(np.array(counts, dtype=np.int64), float(delta))
    pos = np.asarray(pos) - pos[0]
    steps = np.diff(pos)
    if np.any(steps <= 0):
        k = int(np.argmax(steps <= 0)) + 1
        raise IngestError(f"line {lines[k]}: label {labels[k]} is out of order or repeated")
    gaps = np.nonzero(steps > 1)[0]
    if len(gaps) and not fill_gaps:
        k = int(gaps[0])
        raise IngestError(f"gap after label {labels[k]} (line {lines[k]}): "
                          f"{int(steps[k]) - 1} missing bin(s); use fill_gaps to zero-fill")
    full = np.zeros(int(pos[-1]) + 1, dtype=np.int64)
    full[pos] = counts
    return BinCountSeries(full, float(delta))


def load_counts(path, delta: float, fill_gaps: bool = False) -> BinCountSeries:
    """Read a count CSV as bins of width ``delta`` (in the caller's time unit).

    >>> import tempfile, pathlib
    >>> p = pathlib.Path(tempfile.mkdtemp()) / "c.csv"
    >>> _ = p.write_text("0,3\\n1,5\\n")
    >>> load_counts(p, 1.0).counts.tolist()
    [3, 5]
    """
    if delta <= 0:
        raise IngestError("bin width must be > 0")
    with open(path, newline="") as fh:
        return parse_counts(fh.read(), delta, fill_gaps)


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def format_counts_csv(counts, meta: dict | None = None) -> str:
    """``label,count`` CSV with an optional ``# key=value,...`` comment line."""
    buf = io.StringIO()
    if meta:
        buf.write("# " + ",".join(f"{k}={v}" for k, v in meta.items()) + "\n")
    buf.write("label,count\n")
    for i, c in enumerate(np.asarray(counts)):
        buf.write(f"{i},{int(c)}\n")
    return buf.getvalue()


def format_columns_csv(columns: dict, meta: dict | None = None) -> str:
    """CSV of equal-length numeric columns, floats written with ``repr``."""
    buf = io.StringIO()
    if meta:
        buf.write("# " + ",".join(f"{k}={v}" for k, v in meta.items()) + "\n")
    names = list(columns)
    buf.write(",".join(names) + "\n")
    cols = [np.asarray(columns[k]) for k in names]
    for row in zip(*cols):
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _plain(o):
    if isinstance(o, dict):
        return {str(k): _plain(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_plain(v) for v in o]
    if isinstance(o, np.ndarray):
        return _plain(o.tolist())
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (float, np.floating)):
        return float(o) if math.isfinite(o) else None
    return o


def dump_json(obj) -> str:
    """Deterministic JSON: non-finite floats become ``null``."""
    return json.dumps(_plain(obj), indent=2, allow_nan=False) + "\n"


def load_schema() -> dict:
    return json.loads(resources.files("hawkesbin").joinpath("report.schema.json").read_text())


def package_version() -> str:
    from importlib.metadata import PackageNotFoundError, version
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0+unknown"
