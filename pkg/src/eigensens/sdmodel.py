"""The hypothetical two-stock system dynamics model.

Stocks ``S1`` and ``S2`` are fed by the inflows

    R1 = g11*S1 + g12*S2 + 1
    R2 = g21*S1

with gains built from three uniform parameters: ``g11 = x1*x2*x3``,
``g12 = x1*x2`` and ``g21 = x1*x3``. Only the Jacobian of the net flows is
needed, so the model is never integrated in time; the constant inflow drops
out of the Jacobian.

Scalar helpers operate on the small dataclasses below; the ``*_array``
variants do the same arithmetic column-wise for dataset generation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import INPUT, OUTPUT, Dataset
from .errors import ComplexEigenvalueError, EmptyResultError, ValidationError

PARAMETER_NAMES = ("x1", "x2", "x3")
EIGEN_NAMES = ("y1", "y2")


@dataclass(frozen=True)
class ParameterSample:
    x1: float
    x2: float
    x3: float

    def __post_init__(self):
        for name in PARAMETER_NAMES:
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"parameter {name}={v!r} outside [0, 1]")


@dataclass(frozen=True)
class Gains:
    g11: float
    g12: float
    g21: float


@dataclass(frozen=True)
class Jacobian2x2:
    """``J[i][k] = d(dS_i/dt)/dS_k``."""

    j11: float
    j12: float
    j21: float
    j22: float

    def as_array(self) -> np.ndarray:
        return np.array([[self.j11, self.j12], [self.j21, self.j22]])


@dataclass(frozen=True)
class EigenPair:
    """Real eigenvalues in ascending order; ``y2`` is the dominant one."""

    y1: float
    y2: float


def _rng(seed: int) -> np.random.Generator:
    # PCG64 is specified bit-for-bit, so a seed reproduces across platforms.
    return np.random.Generator(np.random.PCG64(seed))


def sample_parameter_array(count: int, seed: int) -> np.ndarray:
    """``count x 3`` matrix of i.i.d. U[0, 1] draws, reproducible from ``seed``."""
    if count < 1:
        raise EmptyResultError(f"sample count must be >= 1, got {count}")
    return _rng(seed).random((count, 3))


def sample_parameters(count: int, seed: int) -> list[ParameterSample]:
    return [ParameterSample(*map(float, row)) for row in sample_parameter_array(count, seed)]


def gains(p: ParameterSample) -> Gains:
    return Gains(p.x1 * p.x2 * p.x3, p.x1 * p.x2, p.x1 * p.x3)


def jacobian(g: Gains) -> Jacobian2x2:
    return Jacobian2x2(g.g11, g.g12, g.g21, 0.0)


def _roots(trace, det, disc):
    # Cancellation-free quadratic roots: take the larger-magnitude root
    # directly, recover the other from the determinant.
    s = np.sqrt(disc)
    big = np.where(trace >= 0, trace + s, trace - s) / 2
    with np.errstate(divide="ignore", invalid="ignore"):
        other = np.where(big != 0, det / np.where(big != 0, big, 1.0), trace - big)
    return np.minimum(big, other), np.maximum(big, other)


def eigenvalues(j: Jacobian2x2) -> EigenPair:
    """Closed-form eigenvalues of a real 2x2 matrix, ascending.

    Raises
    ------
    ComplexEigenvalueError
        If ``(j11 - j22)**2 + 4*j12*j21`` is negative.
    """
    disc = (j.j11 - j.j22) ** 2 + 4.0 * j.j12 * j.j21
    if disc < 0:
        raise ComplexEigenvalueError(f"complex eigenvalues: discriminant {disc!r} < 0")
    lo, hi = _roots(
        np.float64(j.j11 + j.j22), np.float64(j.j11 * j.j22 - j.j12 * j.j21), np.float64(disc)
    )
    return EigenPair(float(lo), float(hi))


def eigenvalue_array(params: np.ndarray) -> np.ndarray:
    """Eigenpairs for every parameter row; returns an ``n x 2`` ascending matrix."""
    params = np.asarray(params, dtype=np.float64)
    x1, x2, x3 = params[:, 0], params[:, 1], params[:, 2]
    g11, g12, g21 = x1 * x2 * x3, x1 * x2, x1 * x3
    disc = g11 * g11 + 4.0 * g12 * g21
    if np.any(disc < 0):
        raise ComplexEigenvalueError("complex eigenvalues for at least one parameter row")
    lo, hi = _roots(g11, -g12 * g21, disc)
    return np.column_stack([lo, hi])


def generate_dataset(count: int, seed: int) -> Dataset:
    """Sample parameters and attach the model's eigenvalues.

    Columns are ``x1, x2, x3`` (inputs) and ``y1, y2`` (outputs).
    """
    if count < 2:
        raise EmptyResultError(f"dataset needs count >= 2, got {count}")
    params = sample_parameter_array(count, seed)
    eig = eigenvalue_array(params)
    return Dataset(
        PARAMETER_NAMES + EIGEN_NAMES,
        (INPUT,) * 3 + (OUTPUT,) * 2,
        np.hstack([params, eig]),
    )


def dominant_eigenvalue(p: ParameterSample) -> float:
    return eigenvalues(jacobian(gains(p))).y2


__all__ = [
    "ParameterSample",
    "Gains",
    "Jacobian2x2",
    "EigenPair",
    "sample_parameters",
    "sample_parameter_array",
    "gains",
    "jacobian",
    "eigenvalues",
    "eigenvalue_array",
    "generate_dataset",
    "dominant_eigenvalue",
]
