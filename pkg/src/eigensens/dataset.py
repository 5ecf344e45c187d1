"""Column-labelled sample matrices and their CSV form.

A CSV dataset is UTF-8, newline-delimited, with one header line of column
names followed by one line per observation. Numbers are written with 17
significant digits so that a write/read cycle reproduces every float bit for
bit.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import UnknownVariableError, ValidationError

INPUT = "input"
OUTPUT = "output"
ROLES = (INPUT, OUTPUT)

#: Derived column: the row-wise larger of ``y1`` and ``y2`` (the dominant eigenvalue).
Y_MAX = "y_max"


def format_float(value: float) -> str:
    return format(float(value), ".17g")


@dataclass(frozen=True)
class Dataset:
    """Samples in rows, named variables in columns, each tagged input or output.

    ``ranges`` holds the per-column ``(min, max)`` recorded when a column was
    min-max normalized; it is empty for raw data.
    """

    names: tuple[str, ...]
    roles: tuple[str, ...]
    values: np.ndarray
    ranges: Mapping[str, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        names = tuple(self.names)
        roles = tuple(self.roles)
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValidationError("dataset values must be a 2-D matrix")
        if len(names) != values.shape[1] or len(roles) != len(names):
            raise ValidationError(
                f"{len(names)} names / {len(roles)} roles for {values.shape[1]} columns"
            )
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate column names in {names}")
        bad = [r for r in roles if r not in ROLES]
        if bad:
            raise ValidationError(f"unknown role(s) {bad}; expected one of {ROLES}")
        if values.shape[0] < 2:
            raise ValidationError(f"dataset needs at least 2 rows, got {values.shape[0]}")
        if not np.all(np.isfinite(values)):
            raise ValidationError("dataset contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "roles", roles)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "ranges", dict(self.ranges))

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def inputs(self) -> tuple[str, ...]:
        return tuple(n for n, r in zip(self.names, self.roles) if r == INPUT)

    @property
    def outputs(self) -> tuple[str, ...]:
        return tuple(n for n, r in zip(self.names, self.roles) if r == OUTPUT)

    def has(self, name: str) -> bool:
        return name in self.names or (
            name == Y_MAX and "y1" in self.names and "y2" in self.names
        )

    def column(self, name: str) -> np.ndarray:
        """Return one column by name; ``y_max`` is derived on the fly if absent."""
        if name in self.names:
            return self.values[:, self.names.index(name)]
        if name == Y_MAX and "y1" in self.names and "y2" in self.names:
            return np.maximum(self.column("y1"), self.column("y2"))
        raise UnknownVariableError(f"unknown column {name!r}; available: {', '.join(self.names)}")

    def select(self, names: Sequence[str]) -> np.ndarray:
        """Matrix of the named columns, in the order given."""
        return np.column_stack([self.column(n) for n in names])

    def with_roles(self, outputs: Iterable[str]) -> "Dataset":
        outs = set(outputs)
        roles = tuple(OUTPUT if n in outs else INPUT for n in self.names)
        return Dataset(self.names, roles, self.values, self.ranges)


def to_csv(dataset: Dataset, path=None) -> str:
    """Serialize ``dataset``; writes to ``path`` when given and returns the text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(dataset.names)
    for row in dataset.values:
        writer.writerow([format_float(v) for v in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8", newline="")
    return text


def read_csv(path, outputs: Iterable[str] = ()) -> Dataset:
    """Load a dataset; columns named in ``outputs`` get the output role."""
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_csv(fh.read(), outputs)


def parse_csv(text: str, outputs: Iterable[str] = ()) -> Dataset:
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r]
    if not rows:
        raise ValidationError("empty CSV: missing header")
    header = [h.strip() for h in rows[0]]
    try:
        values = np.array([[float(v) for v in r] for r in rows[1:]], dtype=np.float64)
    except ValueError as exc:
        raise ValidationError(f"non-numeric CSV field: {exc}") from None
    if values.size == 0:
        values = values.reshape(0, len(header))
    if any(len(r) != len(header) for r in rows[1:]):
        raise ValidationError("ragged CSV: every row must have one field per header column")
    outs = set(outputs)
    roles = tuple(OUTPUT if h in outs else INPUT for h in header)
    return Dataset(tuple(header), roles, values)
