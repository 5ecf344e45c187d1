"""The end-to-end sensitivity pipeline.

``total_mi`` normalizes the selected columns to [0, 1], fits a joint KDE,
discretizes it into a probability grid and returns the mutual information
between the input and output variables. ``leave_one_out`` repeats that with
each input removed (refitting the KDE in the reduced dimension) and scores
every input by how much information is lost without it.
"""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field

import numpy as np

from . import kde
from .dataset import INPUT, OUTPUT, Dataset
from .errors import DegenerateColumnError, UnknownVariableError, ValidationError
from .grid import DEFAULT_BINS, DEFAULT_CELL_CAP, DEFAULT_SPAN, GridConfig, build_grid
from .infotheory import MiResult, mutual_information

log = logging.getLogger(__name__)

MAX_VARIABLES = 6


def minmax_normalize(column, name: str | None = None) -> tuple[np.ndarray, float, float]:
    """Affinely map ``column`` onto [0, 1]; returns ``(normalized, min, max)``.

    Raises
    ------
    DegenerateColumnError
        If the column is constant.
    """
    v = np.asarray(column, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] < 2:
        raise ValidationError("normalization needs a vector of at least 2 values")
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"column {name!r} has non-finite values")
    lo, hi = float(v.min()), float(v.max())
    if not hi > lo:
        raise DegenerateColumnError(name if name is not None else "?",
                                    f"column {name!r} is constant ({lo!r}); it carries no information")
    return (v - lo) / (hi - lo), lo, hi


@dataclass(frozen=True)
class PipelineConfig:
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    bins: int = DEFAULT_BINS
    bandwidth: kde.BandwidthSpec = field(default_factory=kde.BandwidthSpec)
    span: float = DEFAULT_SPAN
    threads: int = 1
    grid_method: str = "product"
    cell_cap: int = DEFAULT_CELL_CAP

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if not self.inputs or not self.outputs:
            raise ValidationError("need at least one input and one output variable")
        names = self.inputs + self.outputs
        if len(set(names)) != len(names):
            raise ValidationError(f"variable names must be distinct across both sides: {names}")
        if len(names) > MAX_VARIABLES:
            raise ValidationError(
                f"{len(names)} variables requested; at most {MAX_VARIABLES} are supported"
            )
        if self.threads < 1:
            raise ValidationError("threads must be >= 1")
        self.grid_config  # validates bins/span

    @property
    def variables(self) -> tuple[str, ...]:
        return self.inputs + self.outputs

    @property
    def grid_config(self) -> GridConfig:
        return GridConfig(self.bins, self.span, self.cell_cap)

    def replace(self, **changes) -> "PipelineConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "bins": self.bins,
            "bandwidth": str(self.bandwidth),
            "span": self.span,
            "grid_method": self.grid_method,
            "cell_cap": self.cell_cap,
        }


def normalized_matrix(dataset: Dataset, names) -> Dataset:
    """Step 1: min-max normalize the named columns into a new dataset."""
    cols, ranges = [], {}
    for name in names:
        v, lo, hi = minmax_normalize(dataset.column(name), name)
        cols.append(v)
        ranges[name] = (lo, hi)
    roles = tuple(OUTPUT if n in dataset.outputs else INPUT for n in names)
    return Dataset(tuple(names), roles, np.column_stack(cols), ranges)


def _check_columns(dataset: Dataset, names) -> None:
    for name in names:
        if not dataset.has(name):
            raise UnknownVariableError(
                f"unknown column {name!r}; available: {', '.join(dataset.names)}"
            )


def total_mi(dataset: Dataset, config: PipelineConfig) -> MiResult:
    """Mutual information between ``config.inputs`` and ``config.outputs``."""
    names = config.variables
    _check_columns(dataset, names)
    config.grid_config.check_capacity(len(names))
    norm = normalized_matrix(dataset, names)
    model = kde.fit(norm.values, config.bandwidth, names)
    roles = (INPUT,) * len(config.inputs) + (OUTPUT,) * len(config.outputs)
    grid = build_grid(model, config.grid_config, names, roles, config.threads, config.grid_method)
    return mutual_information(grid, config.inputs, config.outputs)


@dataclass(frozen=True)
class SensitivityEntry:
    name: str
    mi_without: MiResult
    sensitivity_bits: float
    sensitivity_normalized: float

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "mi_without": self.mi_without.to_dict(),
            "sensitivity_bits": self.sensitivity_bits,
            "sensitivity_normalized": self.sensitivity_normalized,
        }


@dataclass(frozen=True)
class SensitivityReport:
    full_mi: MiResult
    per_input: tuple[SensitivityEntry, ...]
    ranking: tuple[str, ...]

    def entry(self, name: str) -> SensitivityEntry:
        for e in self.per_input:
            if e.name == name:
                return e
        raise UnknownVariableError(f"no sensitivity entry for {name!r}")

    def to_dict(self) -> dict:
        return {
            "full_mi": self.full_mi.to_dict(),
            "per_input": [e.to_dict() for e in self.per_input],
            "ranking": list(self.ranking),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SensitivityReport":
        entries = tuple(
            SensitivityEntry(e["name"], MiResult.from_dict(e["mi_without"]),
                             e["sensitivity_bits"], e["sensitivity_normalized"])
            for e in d["per_input"]
        )
        return cls(MiResult.from_dict(d["full_mi"]), entries, tuple(d["ranking"]))


def leave_one_out(dataset: Dataset, config: PipelineConfig) -> SensitivityReport:
    """Score each input by the drop in MI (bits) when it is left out.

    Every reduced computation refits its own KDE and grid in the lower
    dimension. Ranking is by descending drop; ties keep dataset column order.
    """
    if len(config.inputs) < 2:
        raise ValidationError("leave-one-out needs at least two input variables")
    full = total_mi(dataset, config)
    entries = []
    for name in config.inputs:
        reduced = config.replace(inputs=tuple(v for v in config.inputs if v != name))
        without = total_mi(dataset, reduced)
        diff = full.raw_bits - without.raw_bits
        rel = diff / full.raw_bits if full.raw_bits > 0 else 0.0
        entries.append(SensitivityEntry(name, without, diff, rel))
        log.info("sensitivity(%s) = %.4f bits", name, diff)

    def col(name):
        return dataset.names.index(name) if name in dataset.names else len(dataset.names)

    ranking = tuple(
        e.name for e in sorted(entries, key=lambda e: (-e.sensitivity_bits, col(e.name)))
    )
    return SensitivityReport(full, tuple(entries), ranking)
