"""CSV output: header row, fixed column order, floats at 12 significant digits."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Iterable, Sequence

from .verdict import CSV_COLUMNS

SWEEP_COLUMNS = ("param", "value") + CSV_COLUMNS
BIN_COLUMNS = ("draw", "N1", "N2", "N3", "N", "p_l", "p_u")
HALFPLANE_COLUMNS = ("region", "part", "a", "b", "c")
VERTEX_COLUMNS = ("region", "part", "index", "R0", "R1")


def fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".12g")
    if v is None:
        return ""
    return str(v)


def csv_text(rows: Iterable[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def emit_csv(rows: Iterable[dict], path, columns: Sequence[str] = CSV_COLUMNS) -> Path:
    rows = list(rows)
    for r in rows:
        extra = set(r) - set(columns)
        if extra:
            raise ValueError(f"row has columns outside the schema: {sorted(extra)}")
    path = Path(path)
    path.write_bytes(csv_text(rows, columns).encode("utf-8"))
    return path
