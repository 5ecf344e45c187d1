"""Entropies and generalized mutual information over probability grids.

Mutual information here is the total-correlation form: the sum of every
variable's marginal entropy minus the joint entropy, in bits. It is
symmetric in all variables, so the split into a left and a right side only
matters for normalization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import ValidationError
from .grid import ProbabilityGrid, marginal

#: Cells at or below this probability contribute nothing to an entropy.
ZERO_THRESHOLD = 1e-5
SUM_TOLERANCE = 1e-6


def entropy(p) -> float:
    """Shannon entropy in bits, ``-sum p*log2(p)``, skipping cells <= 1e-5.

    Raises
    ------
    ValidationError
        On negative entries, or if the entries do not sum to 1 within 1e-6.
    """
    p = np.asarray(p, dtype=np.float64).ravel()
    if np.any(p < 0):
        raise ValidationError(f"negative probability {p.min()!r}")
    total = p.sum()
    if abs(total - 1.0) > SUM_TOLERANCE:
        raise ValidationError(f"probabilities sum to {total!r}, not 1")
    q = p[p > ZERO_THRESHOLD]
    return float(-np.sum(q * np.log2(q)))


def joint_entropy(grid: ProbabilityGrid) -> float:
    return entropy(grid.probs)


def normalize_mi(raw_bits: float, bins: int, left_size: int, right_size: int) -> tuple[float, float]:
    """Scale raw MI by ``min(left_size, right_size) * log2(bins)``, clamped to [0, 1].

    Returns ``(score, divisor)``.
    """
    if bins < 2 or left_size < 1 or right_size < 1:
        raise ValidationError(f"bad normalization arguments B={bins}, sizes=({left_size}, {right_size})")
    divisor = min(left_size, right_size) * math.log2(bins)
    return min(1.0, max(0.0, raw_bits / divisor)), divisor


@dataclass(frozen=True)
class MiResult:
    raw_bits: float
    normalized: float
    marginal_entropies: dict[str, float]
    joint_entropy: float
    divisor: float
    left: tuple[str, ...] = ()
    right: tuple[str, ...] = ()
    coverage: float | None = field(default=None)

    def to_dict(self) -> dict:
        return {
            "left": list(self.left),
            "right": list(self.right),
            "raw_bits": self.raw_bits,
            "normalized": self.normalized,
            "marginal_entropies": dict(self.marginal_entropies),
            "joint_entropy": self.joint_entropy,
            "divisor": self.divisor,
            "coverage": self.coverage,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MiResult":
        return cls(
            raw_bits=d["raw_bits"],
            normalized=d["normalized"],
            marginal_entropies=dict(d["marginal_entropies"]),
            joint_entropy=d["joint_entropy"],
            divisor=d["divisor"],
            left=tuple(d.get("left", ())),
            right=tuple(d.get("right", ())),
            coverage=d.get("coverage"),
        )


def mutual_information(grid: ProbabilityGrid, left: Iterable[str], right: Iterable[str]) -> MiResult:
    """Total-correlation MI between two disjoint variable sets of ``grid``.

    If the two sides do not cover every axis, the grid is first marginalized
    onto their union.
    """
    left, right = tuple(left), tuple(right)
    if not left or not right:
        raise ValidationError("both sides of a mutual information need at least one variable")
    overlap = set(left) & set(right)
    if overlap:
        raise ValidationError(f"variables on both sides: {sorted(overlap)}")
    union = set(left) | set(right)
    if union != set(grid.axes):
        grid = marginal(grid, union)
    marg = {v: entropy(marginal(grid, {v}).probs) for v in grid.axes}
    joint = joint_entropy(grid)
    raw = sum(marg.values()) - joint
    score, divisor = normalize_mi(raw, grid.bins, len(left), len(right))
    return MiResult(raw, score, marg, joint, divisor, left, right, grid.coverage)
