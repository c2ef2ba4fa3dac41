"""CSV and JSON serialization shared by the CLI.

Floats are written in Python's shortest round-trip form, so a value read
back is bit-identical to the one written.  Non-finite values are spelled
``inf``, ``-inf`` and ``nan`` in both formats (JSON has no literal for them).
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np


class CsvFormatError(ValueError):
    """Malformed CSV input; the message carries the line number."""


def format_value(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path, header, rows) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError("row length does not match the header")
            writer.writerow([format_value(v) for v in row])


def read_csv(path, text_columns=("error", "status")):
    """Read a CSV written by :func:`write_csv`.

    Returns ``(header, columns)`` where ``columns`` maps each name to a
    float array, or to a list of strings for ``text_columns``.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or not any(cell.strip() for cell in rows[0]):
        raise CsvFormatError(f"{path}: line 1: empty file, expected a header row")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise CsvFormatError(f"{path}: line 1: duplicate column names")
    data = rows[1:]
    if not data:
        raise CsvFormatError(f"{path}: line 2: no data rows")
    columns: dict[str, list] = {h: [] for h in header}
    for lineno, row in enumerate(data, start=2):
        if len(row) != len(header):
            raise CsvFormatError(
                f"{path}: line {lineno}: expected {len(header)} fields, found {len(row)}"
            )
        for name, cell in zip(header, row):
            if name in text_columns:
                columns[name].append(cell)
                continue
            try:
                columns[name].append(float(cell))
            except ValueError:
                raise CsvFormatError(
                    f"{path}: line {lineno}: column {name!r}: cannot parse {cell!r} as a number"
                ) from None
    out = {h: (v if h in text_columns else np.array(v, dtype=float)) for h, v in columns.items()}
    return header, out


def json_ready(obj):
    """Recursively convert to JSON-native types; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_ready(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [json_ready(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


def write_json(path, obj) -> None:
    text = json.dumps(json_ready(obj), indent=2, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8")
