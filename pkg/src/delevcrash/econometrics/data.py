"""Cross-sectional observation table (one row per stock)."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

NUMERIC_COLUMNS = ("log_return", "beta", "smb", "hml", "leverage_ratio", "short_sale_ratio")
COLUMNS = ("id",) + NUMERIC_COLUMNS


class SchemaError(ValueError):
    """Input table does not match the observation schema."""


class MissingColumn(SchemaError):
    def __init__(self, column: str):
        super().__init__(f"missing column {column!r}")
        self.column = column


class UnexpectedColumn(SchemaError):
    def __init__(self, column: str):
        super().__init__(f"unexpected column {column!r}")
        self.column = column


class NonNumericCell(SchemaError):
    """``row`` is 1-based over data rows (the header is not counted)."""

    def __init__(self, row: int, column: str, value: str):
        super().__init__(f"non-numeric value {value!r} at row {row}, column {column!r}")
        self.row = row
        self.column = column
        self.value = value


class EmptyTable(SchemaError):
    def __init__(self):
        super().__init__("table has no data rows")


@dataclass(frozen=True)
class ObservationTable:
    ids: tuple[str, ...]
    columns: dict[str, np.ndarray]

    @property
    def n(self) -> int:
        return len(self.ids)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]


def load_observations(data: bytes | str) -> ObservationTable:
    """Parse CSV with exactly the columns ``id`` plus the six numeric fields, in any order."""
    if isinstance(data, bytes):
        data = data.decode("utf-8-sig")
    reader = csv.reader(io.StringIO(data))
    header = next(reader, None)
    if header is None:
        raise EmptyTable()
    header = [h.strip() for h in header]
    for col in COLUMNS:
        if col not in header:
            raise MissingColumn(col)
    for col in header:
        if col not in COLUMNS:
            raise UnexpectedColumn(col)
    if len(set(header)) != len(header):
        raise SchemaError("duplicate column names in header")
    pos = {name: header.index(name) for name in COLUMNS}

    ids: list[str] = []
    values: dict[str, list[float]] = {c: [] for c in NUMERIC_COLUMNS}
    for rownum, row in enumerate(reader, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise SchemaError(f"row {rownum} has {len(row)} fields, expected {len(header)}")
        ids.append(row[pos["id"]].strip())
        for col in NUMERIC_COLUMNS:
            raw = row[pos[col]].strip()
            try:
                v = float(raw)
            except ValueError:
                raise NonNumericCell(rownum, col, raw) from None
            if not math.isfinite(v):
                raise NonNumericCell(rownum, col, raw)
            values[col].append(v)
    if not ids:
        raise EmptyTable()
    return ObservationTable(tuple(ids), {c: np.asarray(v, dtype=float) for c, v in values.items()})


def dump_observations(table: ObservationTable) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for i, ident in enumerate(table.ids):
        w.writerow([ident] + [repr(float(table.columns[c][i])) for c in NUMERIC_COLUMNS])
    return buf.getvalue().encode("utf-8")
