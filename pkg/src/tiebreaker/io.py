"""Small CSV helpers with line-numbered error reporting.

Files may carry ``#``-prefixed comment lines (used for the resolved run
configuration); they are skipped on input.
"""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np


class CsvFormatError(ValueError):
    """Malformed CSV input; the message names the offending line."""


def read_columns(
    source,
    required: Sequence[str],
    optional: Sequence[str] = (),
) -> dict[str, list[float]]:
    """Read numeric columns from a headed CSV file.

    ``source`` is a path or an open text stream. Missing optional columns are
    absent from the result; empty optional cells are rejected.
    """
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            return read_columns(fh, required, optional)

    header = None
    header_line = 0
    out: dict[str, list[float]] = {}
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cells = [c.strip() for c in next(csv.reader([line]))]
        if header is None:
            header = cells
            header_line = lineno
            missing = [c for c in required if c not in header]
            if missing:
                raise CsvFormatError(
                    f"line {lineno}: header {header} lacks column(s) {missing}"
                )
            wanted = list(required) + [c for c in optional if c in header]
            index = {name: header.index(name) for name in wanted}
            out = {name: [] for name in wanted}
            continue
        if len(cells) != len(header):
            raise CsvFormatError(
                f"line {lineno}: expected {len(header)} fields, got {len(cells)}"
            )
        for name, j in index.items():
            try:
                value = float(cells[j])
            except ValueError:
                raise CsvFormatError(
                    f"line {lineno}: column {name!r} is not numeric: {cells[j]!r}"
                ) from None
            if not math.isfinite(value):
                raise CsvFormatError(f"line {lineno}: column {name!r} is not finite")
            out[name].append(value)
    if header is None:
        raise CsvFormatError("empty CSV input (no header line)")
    if not out or not next(iter(out.values())):
        raise CsvFormatError(f"line {header_line}: header present but no data rows")
    return out


def format_comments(config: Mapping[str, object]) -> str:
    return "".join(f"# {key}={value}\n" for key, value in config.items())


def write_rows(
    dest,
    header: Sequence[str],
    rows: Iterable[Sequence[object]],
    comments: Mapping[str, object] | None = None,
) -> None:
    """Write a CSV table, prefixed by ``# key=value`` comment lines."""
    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="") as fh:
            write_rows(fh, header, rows, comments)
        return
    if comments:
        dest.write(format_comments(comments))
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])


def _fmt(v):
    # numpy scalars would otherwise be written as e.g. "np.float64(1.0)"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def rows_to_string(header, rows, comments=None) -> str:
    buf = io.StringIO()
    write_rows(buf, header, rows, comments)
    return buf.getvalue()
