"""CSV files with ``#``-prefixed ``key=value`` header comments."""
from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from . import __version__


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, columns, rows, header=None, footer=None):
    """Write rows to ``path`` (or return the text when ``path`` is None).

    ``header`` is a mapping echoed as ``# key=value`` lines before the column
    row; ``footer`` is a list of free-text comment lines appended at the end.
    Output is byte-stable for identical inputs.
    """
    buf = io.StringIO()
    buf.write(f"# version={__version__}\n")
    for key, value in (header or {}).items():
        buf.write(f"# {key}={_fmt(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    for line in footer or ():
        buf.write(f"# {line}\n")
    text = buf.getvalue()
    if path is None:
        return text
    Path(path).write_text(text)
    return text


def read_csv(path):
    """Return ``(header, columns, rows)``; values stay strings."""
    header = {}
    lines = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                header.setdefault(key.strip(), value.strip())
            continue
        if line.strip():
            lines.append(line)
    reader = csv.reader(lines)
    columns = next(reader, [])
    return header, columns, list(reader)
