"""Report writers: delimited tables, JSON-lines documents, plot-data files.

Every file is written to a temporary sibling and renamed into place, so an
interrupted run never leaves a truncated report behind.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence


def atomic_write_text(path: os.PathLike | str, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
    return path


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def delimited(columns: Sequence[str], rows: Iterable[Sequence[Any]], delimiter: str = "\t") -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def json_lines(records: Iterable[Mapping[str, Any]]) -> str:
    return "".join(json.dumps(r, sort_keys=True, allow_nan=True) + "\n" for r in records)


def write_table(path, columns, rows, delimiter="\t") -> Path:
    return atomic_write_text(path, delimited(columns, rows, delimiter))


def write_json_lines(path, records) -> Path:
    return atomic_write_text(path, json_lines(records))


def write_json(path, document: Mapping[str, Any]) -> Path:
    return atomic_write_text(path, json.dumps(document, sort_keys=True, indent=2) + "\n")


def write_plot_data(path, points: Iterable[tuple[Any, Any, Any]]) -> Path:
    """Long-format series for external plotting: columns x, y, series."""
    return write_table(path, ("x", "y", "series"), points)
