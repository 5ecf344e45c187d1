"""Discretization of a fitted KDE into a hypercube probability tensor.

The region ``[0, span]^d`` is cut into ``B`` equal bins per axis. The lowest
bin on every axis is open to ``-inf`` (the kernel cdf integrates from there),
so the lower tail of the estimate lands in bin 0. Mass beyond ``span`` is
lost and restored by renormalization; the lost fraction is kept on the grid
as ``coverage``.

Two constructions are provided. :func:`build_grid_reference` assigns each
cell its upper-corner cdf minus all mass already assigned to cells it
dominates, visiting cells in lexicographic order. :func:`build_grid_product`
uses the diagonal bandwidth to factor each sample's contribution into
per-axis cdf increments. Both give the same tensor up to round-off.
"""
from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import ndtr

from ._backend import kernels
from .dataset import INPUT
from .errors import CapacityError, DimensionMismatchError, EmptyGridError, UnknownVariableError, ValidationError
from .kde import KdeModel, cdf_batch

log = logging.getLogger(__name__)

DEFAULT_BINS = 10
DEFAULT_SPAN = 1.1
DEFAULT_CELL_CAP = 10**7
SAMPLE_CHUNK = 1024
COVERAGE_WARN = 0.95


@dataclass(frozen=True)
class GridConfig:
    bins: int = DEFAULT_BINS
    span: float = DEFAULT_SPAN
    cell_cap: int = DEFAULT_CELL_CAP

    def __post_init__(self):
        if int(self.bins) != self.bins or self.bins < 2:
            raise ValidationError(f"bins per dimension must be an integer >= 2, got {self.bins}")
        if not self.span > 0:
            raise ValidationError(f"grid span must be positive, got {self.span}")

    @property
    def cell_length(self) -> float:
        return self.span / self.bins

    def upper_edges(self) -> np.ndarray:
        return np.arange(1, self.bins + 1) * self.cell_length

    def check_capacity(self, dim: int) -> None:
        cells = self.bins**dim
        # the cap itself is already out of bounds: 10 bins in 7 dimensions must fail
        if cells >= self.cell_cap:
            raise CapacityError(
                f"{self.bins}^{dim} = {cells} cells reaches the cap of {self.cell_cap}"
            )


@dataclass(frozen=True, eq=False)
class ProbabilityGrid:
    """Cell probabilities over ``B`` bins per axis, one axis per named variable."""

    probs: np.ndarray
    axes: tuple[str, ...]
    roles: tuple[str, ...] = ()
    coverage: float | None = field(default=None, compare=False)

    def __post_init__(self):
        probs = np.array(self.probs, dtype=np.float64)
        axes = tuple(self.axes)
        roles = tuple(self.roles) or (INPUT,) * len(axes)
        if probs.ndim != len(axes) or len(roles) != len(axes):
            raise DimensionMismatchError(
                f"tensor rank {probs.ndim} vs {len(axes)} axis names / {len(roles)} roles"
            )
        if len(set(axes)) != len(axes):
            raise ValidationError(f"duplicate axis names {axes}")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "roles", roles)

    @property
    def bins(self) -> int:
        return self.probs.shape[0]

    @property
    def total(self) -> float:
        return float(self.probs.sum())

    def axis_index(self, name: str) -> int:
        try:
            return self.axes.index(name)
        except ValueError:
            raise UnknownVariableError(f"unknown axis {name!r}; grid axes are {self.axes}") from None


def _default_axes(dim, axes, roles):
    axes = tuple(axes) if axes is not None else tuple(f"v{k}" for k in range(dim))
    if len(axes) != dim:
        raise DimensionMismatchError(f"{len(axes)} axis names for a {dim}-dimensional model")
    return axes, tuple(roles) if roles is not None else (INPUT,) * dim


def upper_corners(config: GridConfig, dim: int) -> np.ndarray:
    """Upper corner of every cell, one row per cell, lexicographic (last axis fastest)."""
    idx = np.indices((config.bins,) * dim).reshape(dim, -1).T
    return (idx + 1) * config.cell_length


def reference_masses(model: KdeModel, config: GridConfig, threads: int = 1) -> np.ndarray:
    """Unnormalized cell masses by cumulative subtraction of corner cdf values."""
    config.check_capacity(model.dim)
    corner = cdf_batch(model, upper_corners(config, model.dim), threads=threads)
    flat = kernels.reference_subtract(np.ascontiguousarray(corner), config.bins, model.dim)
    return np.asarray(flat).reshape((config.bins,) * model.dim)


def cdf_increments(model: KdeModel, config: GridConfig) -> np.ndarray:
    """Per-sample, per-axis bin masses, shape ``(d, n, B)``.

    Entry ``[k, i, b]`` is ``Phi((e_{b+1} - x_ik)/h_k) - Phi((e_b - x_ik)/h_k)``
    with ``e_0 = -inf``.
    """
    edges = config.upper_edges()
    z = (edges[None, None, :] - model.samples.T[:, :, None]) / model.bandwidth[:, None, None]
    upper = ndtr(z)
    lower = np.concatenate([np.zeros(upper.shape[:2] + (1,)), upper[:, :, :-1]], axis=2)
    return np.ascontiguousarray(upper - lower)


def _pairwise_sum(parts: list[np.ndarray]) -> np.ndarray:
    while len(parts) > 1:
        nxt = [parts[i] + parts[i + 1] for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def product_masses(model: KdeModel, config: GridConfig, threads: int = 1) -> np.ndarray:
    """Unnormalized cell masses from per-axis cdf increments.

    Samples are split into fixed-size chunks independent of ``threads``;
    chunk partial sums are combined pairwise in chunk order, so the result
    does not depend on the thread count.
    """
    config.check_capacity(model.dim)
    inc = cdf_increments(model, config)
    n = model.n
    bounds = [(lo, min(n, lo + SAMPLE_CHUNK)) for lo in range(0, n, SAMPLE_CHUNK)]

    def run(b):
        return np.asarray(kernels.product_accumulate(inc, b[0], b[1]))

    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, bounds))
    else:
        parts = [run(b) for b in bounds]
    return (_pairwise_sum(parts) / n).reshape((config.bins,) * model.dim)


def clamp_normalize(grid: ProbabilityGrid) -> ProbabilityGrid:
    """Zero out negative cells and rescale to unit total.

    The total after clamping (the mass the grid actually captured) is stored
    as ``coverage``.

    Raises
    ------
    EmptyGridError
        If nothing positive is left to normalize.
    """
    probs = np.clip(grid.probs, 0.0, None)
    total = float(probs.sum())
    if not total > 0 or not np.isfinite(total):
        raise EmptyGridError(f"grid over {grid.axes} holds no probability mass (total {total})")
    return ProbabilityGrid(probs / total, grid.axes, grid.roles, coverage=total)


def _finish(masses, model, axes, roles):
    axes, roles = _default_axes(model.dim, axes, roles)
    grid = clamp_normalize(ProbabilityGrid(masses, axes, roles))
    if grid.coverage < COVERAGE_WARN:
        log.warning("grid over %s captured only %.3f of the estimated mass", axes, grid.coverage)
    return grid


def build_grid_reference(model: KdeModel, config: GridConfig = GridConfig(),
                         axes: Sequence[str] | None = None, roles: Sequence[str] | None = None,
                         threads: int = 1) -> ProbabilityGrid:
    return _finish(reference_masses(model, config, threads), model, axes, roles)


def build_grid_product(model: KdeModel, config: GridConfig = GridConfig(),
                       axes: Sequence[str] | None = None, roles: Sequence[str] | None = None,
                       threads: int = 1) -> ProbabilityGrid:
    return _finish(product_masses(model, config, threads), model, axes, roles)


def build_grid(model: KdeModel, config: GridConfig = GridConfig(), axes=None, roles=None,
               threads: int = 1, method: str = "product") -> ProbabilityGrid:
    if method == "product":
        return build_grid_product(model, config, axes, roles, threads)
    if method == "reference":
        return build_grid_reference(model, config, axes, roles, threads)
    raise ValidationError(f"unknown grid method {method!r}")


def marginal(grid: ProbabilityGrid, keep_axes: Iterable[str]) -> ProbabilityGrid:
    """Sum out every axis not in ``keep_axes``; surviving axes keep their order."""
    keep = set(keep_axes)
    if not keep:
        raise ValidationError("marginal needs at least one axis to keep")
    for name in keep:
        grid.axis_index(name)
    drop = tuple(k for k, a in enumerate(grid.axes) if a not in keep)
    probs = grid.probs.sum(axis=drop) if drop else grid.probs
    kept = [k for k in range(len(grid.axes)) if k not in drop]
    return ProbabilityGrid(
        probs,
        tuple(grid.axes[k] for k in kept),
        tuple(grid.roles[k] for k in kept),
        coverage=grid.coverage,
    )


def write_grid_csv(grid: ProbabilityGrid, path) -> None:
    """Dump one row per cell (index vector, probability), lexicographic order."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(grid.axes) + ["probability"])
        for idx in np.ndindex(grid.probs.shape):
            writer.writerow(list(idx) + [format(float(grid.probs[idx]), ".17g")])
