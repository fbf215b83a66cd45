"""CSV and JSON writers shared by the file-producing operations.

Every CSV starts with one ``# meta: {...}`` comment line carrying the
resolved configuration, so an output file can be replayed from its own
contents. Floats are written with 17 significant digits (round-trip exact
for float64).
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

FLOAT_FMT = "%.17g"


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return FLOAT_FMT % value
    return str(value)


def write_csv(path, header, columns, meta=None):
    """Write equal-length ``columns`` under ``header`` to ``path``.

    ``meta`` is serialised (sorted keys) into the leading comment line.
    """
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    columns = [np.asarray(c) if not isinstance(c, list) else c for c in columns]
    n = len(columns[0]) if columns else 0
    if any(len(c) != n for c in columns):
        raise ValueError("all columns must have the same length")
    lines = []
    if meta is not None:
        lines.append("# meta: " + json.dumps(meta, sort_keys=True, default=_json_default))
    lines.append(",".join(header))
    for i in range(n):
        lines.append(",".join(_fmt(c[i]) for c in columns))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def read_csv(path):
    """Read a file written by :func:`write_csv`.

    Returns ``(meta, columns)`` where ``columns`` maps header names to numpy
    arrays (float where possible, str otherwise).
    """
    meta = None
    with open(path) as fh:
        rows = fh.read().splitlines()
    if rows and rows[0].startswith("# meta: "):
        meta = json.loads(rows[0][len("# meta: "):])
        rows = rows[1:]
    header = rows[0].split(",")
    body = [r.split(",") for r in rows[1:] if r]
    columns = {}
    for j, name in enumerate(header):
        raw = [r[j] for r in body]
        try:
            columns[name] = np.array([float(v) for v in raw])
        except ValueError:
            columns[name] = np.array(raw)
    return meta, columns


def write_json(path, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (Path, os.PathLike)):
        return str(obj)
    if hasattr(obj, "value"):
        return obj.value
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")
