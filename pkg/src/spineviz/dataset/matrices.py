"""Per-attribute value matrices and their CSV form.

One matrix per observed attribute: rows are simulation ticks, columns are
structures. Missing cells are empty (or "nan") in the CSV and NaN in memory.
Vector attributes use three columns per structure, suffixed ":x", ":y", ":z".
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import FormatError

VECTOR_SUFFIXES = (":x", ":y", ":z")


class Attribute(str, Enum):
    FORCE_MAGNITUDE = "force_magnitude"
    FORCE_VECTOR = "force_vector"
    DEFORMATION = "deformation"

    @property
    def components(self) -> int:
        return 3 if self is Attribute.FORCE_VECTOR else 1

    @property
    def unit(self) -> str:
        return "mm" if self is Attribute.DEFORMATION else "N"


@dataclass(frozen=True)
class ValueMatrix:
    """times x structures grid of one attribute; NaN marks MISSING cells."""

    attribute: Attribute
    times: np.ndarray  # (T,)
    columns: tuple[str, ...]
    values: np.ndarray  # (T, C) scalar or (T, C, 3) vector
    _col_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        expected = (len(times), len(self.columns))
        if self.attribute.components == 3:
            expected = expected + (3,)
        if values.shape != expected:
            raise FormatError(
                f"value grid shape {values.shape} does not match {expected}"
            )
        if len(times) > 1 and not np.all(np.diff(times) > 0):
            raise FormatError("times are not strictly increasing")
        object.__setattr__(self, "_col_index", {c: i for i, c in enumerate(self.columns)})

    @property
    def n_ticks(self) -> int:
        return len(self.times)

    def has_column(self, structure_id: str) -> bool:
        return structure_id in self._col_index

    def column_values(self, structure_id: str) -> np.ndarray:
        return self.values[:, self._col_index[structure_id]]

    def value_at(self, row: int, structure_id: str):
        """Total O(1) lookup; returns NaN (or a NaN vector) for MISSING."""
        return self.values[row, self._col_index[structure_id]]

    def is_missing(self, row: int, structure_id: str) -> bool:
        return bool(np.any(np.isnan(self.value_at(row, structure_id))))

    def all_missing(self, structure_id: str) -> bool:
        return bool(np.all(np.isnan(self.column_values(structure_id))))

    def snap_index(self, t: float) -> int:
        """Nearest tick for a time; a midpoint rounds to the later tick."""
        times = self.times
        if t <= times[0]:
            return 0
        if t >= times[-1]:
            return len(times) - 1
        right = int(np.searchsorted(times, t, side="left"))
        left = right - 1
        if right >= len(times):
            return left
        return right if (t - times[left]) >= (times[right] - t) else left

    def present_max(self) -> float:
        """Largest non-missing magnitude (vector attributes use the norm)."""
        vals = self.values
        if self.attribute.components == 3:
            vals = np.linalg.norm(vals, axis=-1)
        if np.all(np.isnan(vals)):
            return 0.0
        return float(np.nanmax(vals))


def _strip_unit_hint(token: str, expected_unit: str) -> str:
    if token.endswith("]") and "[" in token:
        name, _, hint = token[:-1].partition("[")
        if hint != expected_unit:
            warnings.warn(
                f"ignoring unknown unit hint {hint!r} on column {name!r}"
                f" (expected {expected_unit!r})",
                stacklevel=3,
            )
        return name
    return token


def _parse_cell(cell: str, line_no: int) -> float:
    cell = cell.strip()
    if cell == "" or cell.lower() == "nan":
        return math.nan
    try:
        return float(cell)
    except ValueError as exc:
        raise FormatError(f"line {line_no}: bad numeric cell {cell!r}") from exc


def parse_matrix_csv(text: str, attribute: Attribute) -> ValueMatrix:
    """Parse one matrix CSV; header is `time,<id>,...` (vector ids suffixed)."""
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise FormatError("empty matrix file")
    header = [c.strip() for c in rows[0]]
    if not header or _strip_unit_hint(header[0], "s") != "time":
        raise FormatError("matrix header must start with a 'time' column")
    data_header = [_strip_unit_hint(c, attribute.unit) for c in header[1:]]

    if attribute.components == 3:
        if len(data_header) % 3 != 0:
            raise FormatError("vector matrix header is not grouped in x/y/z triples")
        columns = []
        for i in range(0, len(data_header), 3):
            triple = data_header[i : i + 3]
            bases = [c[: -len(s)] if c.endswith(s) else None for c, s in zip(triple, VECTOR_SUFFIXES)]
            if None in bases or len(set(bases)) != 1:
                raise FormatError(f"bad vector column group {triple}")
            columns.append(bases[0])
    else:
        columns = data_header

    times = []
    cells = []
    width = len(header)
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise FormatError(f"line {line_no}: ragged row ({len(row)} cells, expected {width})")
        t = _parse_cell(row[0], line_no)
        if math.isnan(t):
            raise FormatError(f"line {line_no}: missing time value")
        if times and t <= times[-1]:
            raise FormatError(f"line {line_no}: non-monotonic time {t!r}")
        times.append(t)
        cells.append([_parse_cell(c, line_no) for c in row[1:]])

    values = np.array(cells, dtype=float).reshape(len(times), len(columns), attribute.components)
    if attribute.components == 1:
        values = values[:, :, 0]
    return ValueMatrix(attribute, np.array(times), tuple(columns), values)


def _fmt(x: float) -> str:
    return "" if math.isnan(x) else repr(x)


def serialize_matrix_csv(matrix: ValueMatrix) -> str:
    """Inverse of parse_matrix_csv; float cells round-trip bit-for-bit."""
    out = io.StringIO()
    if matrix.attribute.components == 3:
        header = ["time"] + [c + s for c in matrix.columns for s in VECTOR_SUFFIXES]
        grid = matrix.values.reshape(matrix.n_ticks, -1)
    else:
        header = ["time"] + list(matrix.columns)
        grid = matrix.values
    out.write(",".join(header) + "\n")
    for t, row in zip(matrix.times, grid):
        out.write(",".join([repr(float(t))] + [_fmt(float(v)) for v in row]) + "\n")
    return out.getvalue()
