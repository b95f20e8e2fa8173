"""
Result tables and their serialisation.

Files carry no timestamps: identical run configurations produce byte-identical output.
Complex columns are split into modulus and phase before they reach a table.
"""

from __future__ import annotations

import cmath
import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, TextIO

from cli import __version__
from core.errors import ParaqedError

logger = logging.getLogger(__name__)


@dataclass
class ResultTable:
    command: str
    columns: list[str]
    rows: list[tuple] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)

    def add_row(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values for {len(self.columns)} columns")
        self.rows.append(tuple(values))


def split_complex(value: complex) -> tuple[float, float]:
    """modulus and phase in (-pi, pi]"""
    return abs(value), cmath.phase(value)


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def header_lines(table: ResultTable) -> list[str]:
    lines = [f"paraqed {__version__}", f"command: {table.command}"]
    for key in sorted(table.meta):
        lines.append(f"{key}: {json.dumps(table.meta[key], sort_keys=True)}")
    return lines


def write_csv(table: ResultTable, stream: TextIO) -> None:
    for line in header_lines(table):
        stream.write(f"# {line}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_value(v) for v in row])


def write_json(table: ResultTable, stream: TextIO) -> None:
    document = {
        "version": __version__,
        "command": table.command,
        "meta": table.meta,
        "columns": table.columns,
        "rows": [[_json_value(v) for v in row] for row in table.rows],
    }
    stream.write(json.dumps(document, sort_keys=True, indent=2))
    stream.write("\n")


def render(table: ResultTable, fmt: str) -> str:
    buffer = io.StringIO()
    if fmt == "csv":
        write_csv(table, buffer)
    elif fmt == "json":
        write_json(table, buffer)
    else:
        raise ValueError(f"unknown output format {fmt!r}")
    return buffer.getvalue()


def emit(table: ResultTable, fmt: str, path: Path | None, stream: TextIO) -> None:
    """write to path when given, else to stream"""
    text = render(table, fmt)
    if path is None:
        stream.write(text)
        return
    path.write_text(text, encoding="utf-8")
    logger.info(f"wrote {len(table.rows)} rows to {path}")


def error_record(error: BaseException) -> str:
    """one-line machine-readable error description"""
    if isinstance(error, ParaqedError):
        record = error.to_record()
    else:
        record = {"error": type(error).__name__, "message": str(error), "context": {}}
    return json.dumps(record, sort_keys=True, default=str)
