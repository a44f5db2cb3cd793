# output.py
"""Write result rows as CSV (pandas, 12 significant digits) or JSON."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np
import pandas as pd

FLOAT_FORMAT = "%.12g"


def _plain(value: Any) -> Any:
    """Convert numpy scalars and booleans to JSON/CSV friendly values."""
    if isinstance(value, (bool, np.bool_)):
        return int(bool(value))
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def _json_value(value: Any) -> Any:
    value = _plain(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return float(FLOAT_FORMAT % value)
    return value


def rows_to_frame(rows: Iterable[Mapping[str, Any]], columns: list[str] | None = None) -> pd.DataFrame:
    records = [{key: _plain(value) for key, value in row.items()} for row in rows]
    frame = pd.DataFrame.from_records(records)
    if columns is not None:
        frame = frame.reindex(columns=columns)
    return frame


def write_rows(
    rows: list[Mapping[str, Any]],
    path: str | Path,
    fmt: str = "csv",
    columns: list[str] | None = None,
) -> Path:
    """Write every row at once; nothing touches the disk before this call."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if columns is None and rows:
        columns = list(rows[0].keys())
    if fmt == "csv":
        frame = rows_to_frame(rows, columns)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    elif fmt == "json":
        records = [{key: _json_value(row.get(key)) for key in (columns or row.keys())} for row in rows]
        path.write_text(json.dumps(records, indent=2) + "\n", encoding="utf-8")
    else:
        raise ValueError(f"unknown output format {fmt!r}")
    return path


def write_record(record: Mapping[str, Any], path: str | Path, fmt: str = "csv") -> Path:
    """Write one structured record: a JSON object, or a one-row CSV."""
    if fmt == "json":
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        data = {key: _json_value(value) for key, value in record.items()}
        path.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
        return path
    return write_rows([record], path, fmt)


def sibling_path(path: str | Path, suffix: str, fmt: str) -> Path:
    """``out.csv`` -> ``out_<suffix>.csv`` next to the main output."""
    path = Path(path)
    return path.with_name(f"{path.stem}_{suffix}.{fmt}")
