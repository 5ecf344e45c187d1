"""Gaussian product-kernel density estimation with a diagonal bandwidth.

For samples ``x_i`` (``n x d``) and bandwidths ``h_k``::

    pdf(p) = 1/n * sum_i prod_k K((p_k - x_ik) / h_k) / h_k
    cdf(p) = 1/n * sum_i prod_k Phi((p_k - x_ik) / h_k)

with ``K`` the standard normal density and ``Phi`` its cdf. Bandwidths come
from Silverman's rule of thumb or from a least-squares fit of the estimated
cdf to the empirical cdf.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import erfc

from ._backend import kernels
from .errors import DegenerateColumnError, DimensionMismatchError, ValidationError

log = logging.getLogger(__name__)

SILVERMAN = "silverman"
CDF_LS = "cdf-least-squares"
DEFAULT_BUDGET = 200
_INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_POINT_CHUNK = 256


def gaussian_kernel(y):
    """Standard normal density ``exp(-y**2/2) / sqrt(2*pi)``; accepts scalars or arrays."""
    y = np.asarray(y, dtype=np.float64)
    out = _INV_SQRT2PI * np.exp(-0.5 * y * y)
    return float(out) if out.ndim == 0 else out


def normal_cdf(z):
    """Standard normal cdf evaluated through ``erfc`` (accurate in both tails)."""
    z = np.asarray(z, dtype=np.float64)
    out = 0.5 * erfc(-z / math.sqrt(2.0))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class KdeModel:
    """Immutable fitted estimator: the (normalized) samples and per-axis bandwidths."""

    samples: np.ndarray
    bandwidth: np.ndarray

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64, order="C")
        if samples.ndim == 1:
            samples = samples[:, None]
        bw = np.array(self.bandwidth, dtype=np.float64).reshape(-1)
        if samples.ndim != 2 or samples.shape[0] < 2 or samples.shape[1] < 1:
            raise ValidationError(f"need an n x d sample matrix with n >= 2, got {samples.shape}")
        if bw.shape[0] != samples.shape[1]:
            raise DimensionMismatchError(
                f"{bw.shape[0]} bandwidths for {samples.shape[1]}-dimensional samples"
            )
        if not np.all(np.isfinite(bw)) or np.any(bw <= 0):
            raise ValidationError(f"bandwidths must be positive and finite, got {bw}")
        samples.setflags(write=False)
        bw.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "bandwidth", bw)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def dim(self) -> int:
        return self.samples.shape[1]


def _points(model_dim: int, points) -> np.ndarray:
    pts = np.array(points, dtype=np.float64, order="C", ndmin=1)
    if pts.ndim == 1:
        pts = pts.reshape(-1, model_dim) if model_dim == 1 else pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != model_dim:
        raise DimensionMismatchError(
            f"query points have {pts.shape[-1]} coordinates, model has {model_dim}"
        )
    return pts


def _batched(fn, model: KdeModel, pts: np.ndarray, threads: int) -> np.ndarray:
    # Each query point is computed independently, so chunking over points
    # cannot change any individual result.
    if threads <= 1 or pts.shape[0] <= _POINT_CHUNK:
        return fn(model.samples, model.bandwidth, pts)
    chunks = [pts[i:i + _POINT_CHUNK] for i in range(0, pts.shape[0], _POINT_CHUNK)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda c: fn(model.samples, model.bandwidth, c), chunks))
    return np.concatenate(parts)


def pdf(model: KdeModel, point) -> float:
    pts = _points(model.dim, point)
    if pts.shape[0] != 1:
        raise DimensionMismatchError(f"expected a single {model.dim}-vector")
    return float(kernels.kde_pdf(model.samples, model.bandwidth, pts)[0])


def cdf(model: KdeModel, point) -> float:
    pts = _points(model.dim, point)
    if pts.shape[0] != 1:
        raise DimensionMismatchError(f"expected a single {model.dim}-vector")
    return float(kernels.kde_cdf(model.samples, model.bandwidth, pts)[0])


def pdf_batch(model: KdeModel, points, threads: int = 1) -> np.ndarray:
    return _batched(kernels.kde_pdf, model, _points(model.dim, points), threads)


def cdf_batch(model: KdeModel, points, threads: int = 1) -> np.ndarray:
    """Estimated cdf at each row of ``points`` (``m x d``)."""
    return _batched(kernels.kde_cdf, model, _points(model.dim, points), threads)


def _as_matrix(samples) -> np.ndarray:
    x = np.array(samples, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValidationError("samples must be a vector or an n x d matrix")
    return x


def empirical_cdf(samples, point) -> float:
    """Fraction of sample rows lying at or below ``point`` in every coordinate."""
    x = _as_matrix(samples)
    if x.shape[0] < 1:
        raise ValidationError("empirical cdf needs at least one sample")
    p = np.asarray(point, dtype=np.float64).reshape(-1)
    if p.shape[0] != x.shape[1]:
        raise DimensionMismatchError(f"point has {p.shape[0]} coordinates, samples have {x.shape[1]}")
    return float(np.mean(np.all(x <= p, axis=1)))


def empirical_cdf_batch(samples, points) -> np.ndarray:
    x = _as_matrix(samples)
    pts = _as_matrix(points)
    if pts.shape[1] != x.shape[1]:
        raise DimensionMismatchError(f"points have {pts.shape[1]} coordinates, samples have {x.shape[1]}")
    out = np.empty(pts.shape[0])
    step = max(1, (1 << 22) // max(1, x.size))
    for lo in range(0, pts.shape[0], step):
        blk = pts[lo:lo + step]
        out[lo:lo + step] = np.all(x[None, :, :] <= blk[:, None, :], axis=2).mean(axis=1)
    return out


def silverman_bandwidth(samples, names: Sequence[str] | None = None) -> np.ndarray:
    """Per-axis rule of thumb ``sigma_k * (4 / ((d + 2) * n)) ** (1 / (d + 4))``.

    ``sigma_k`` is the sample standard deviation (``ddof=1``) of column k.

    Raises
    ------
    DegenerateColumnError
        If any column has zero spread; the message names the column.
    """
    x = _as_matrix(samples)
    n, d = x.shape
    if n < 2:
        raise ValidationError(f"Silverman's rule needs n >= 2, got {n}")
    sigma = x.std(axis=0, ddof=1)
    for k in range(d):
        if not sigma[k] > 0:
            raise DegenerateColumnError(names[k] if names is not None else k)
    return sigma * (4.0 / ((d + 2) * n)) ** (1.0 / (d + 4))


def cdf_ls_objective(samples, bandwidth, ecdf: np.ndarray | None = None) -> float:
    """Mean squared gap between estimated and empirical cdf over the sample points."""
    x = np.ascontiguousarray(_as_matrix(samples))
    if ecdf is None:
        ecdf = empirical_cdf_batch(x, x)
    est = kernels.kde_cdf(x, np.asarray(bandwidth, dtype=np.float64), x)
    return float(np.mean((est - ecdf) ** 2))


def _golden_line(f, lo, hi, max_evals, tol=1e-6):
    """Golden-section minimization of ``f`` on ``[lo, hi]``; returns (x, f(x), evals)."""
    if max_evals < 2:
        return None, math.inf, 0
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    evals = 2
    while evals < max_evals and b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
        evals += 1
    return (x1, f1, evals) if f1 <= f2 else (x2, f2, evals)


def cdf_ls_bandwidth(samples, budget: int = DEFAULT_BUDGET,
                     names: Sequence[str] | None = None) -> np.ndarray:
    """Bandwidths minimizing :func:`cdf_ls_objective` by coordinate-wise golden sections.

    The search starts at Silverman's vector and is boxed to a factor of 20
    either side of it per axis (searched on a log scale). Sweeps over the
    axes repeat until ``budget`` objective evaluations are spent or a sweep
    improves the objective by less than 1e-10. A line-search result replaces
    the current bandwidth only when it lowers the objective.
    """
    x = np.ascontiguousarray(_as_matrix(samples))
    d = x.shape[1]
    if budget < d:
        raise ValidationError(f"search budget {budget} is smaller than the dimension {d}")
    start = silverman_bandwidth(x, names)
    log_lo, log_hi = np.log(start / 20.0), np.log(start * 20.0)
    ecdf = empirical_cdf_batch(x, x)

    h = start.copy()
    best = cdf_ls_objective(x, h, ecdf)
    used = 1
    per_line = max(4, min(40, budget // max(1, d)))
    while used < budget:
        before = best
        for k in range(d):
            remaining = budget - used
            if remaining < 2:
                break

            def along(u, k=k):
                trial = h.copy()
                trial[k] = math.exp(u)
                return cdf_ls_objective(x, trial, ecdf)

            u, fu, evals = _golden_line(along, log_lo[k], log_hi[k], min(per_line, remaining))
            used += evals
            if fu < best:
                h[k] = min(max(math.exp(u), start[k] / 20.0), start[k] * 20.0)
                best = fu
        if before - best < 1e-10:
            break
    log.debug("cdf-ls bandwidth %s after %d evaluations (objective %.3g)", h, used, best)
    return h


@dataclass(frozen=True)
class BandwidthSpec:
    strategy: str = SILVERMAN
    budget: int | None = field(default=None)

    def __post_init__(self):
        if self.strategy not in (SILVERMAN, CDF_LS):
            raise ValidationError(f"unknown bandwidth strategy {self.strategy!r}")
        if self.strategy == SILVERMAN and self.budget is not None:
            raise ValidationError("a search budget only applies to cdf-least-squares")
        if self.strategy == CDF_LS:
            if self.budget is None:
                object.__setattr__(self, "budget", DEFAULT_BUDGET)
            elif self.budget < 1:
                raise ValidationError(f"search budget must be positive, got {self.budget}")

    @classmethod
    def parse(cls, text: str) -> "BandwidthSpec":
        """Parse ``silverman`` or ``cv-ls[:budget]`` (``cdf-least-squares`` also accepted)."""
        name, _, budget = text.strip().partition(":")
        name = name.lower()
        if name == SILVERMAN and not budget:
            return cls(SILVERMAN)
        if name in ("cv-ls", "cv_ls", CDF_LS):
            try:
                return cls(CDF_LS, int(budget) if budget else None)
            except ValueError:
                raise ValidationError(f"bad search budget in {text!r}") from None
        raise ValidationError(f"unknown bandwidth spec {text!r}; use 'silverman' or 'cv-ls[:budget]'")

    def __str__(self):
        return SILVERMAN if self.strategy == SILVERMAN else f"cv-ls:{self.budget}"


def select_bandwidth(samples, spec: BandwidthSpec, names: Sequence[str] | None = None) -> np.ndarray:
    if spec.strategy == SILVERMAN:
        return silverman_bandwidth(samples, names)
    return cdf_ls_bandwidth(samples, spec.budget, names)


def fit(samples, spec: BandwidthSpec = BandwidthSpec(), names: Sequence[str] | None = None) -> KdeModel:
    return KdeModel(_as_matrix(samples), select_bandwidth(samples, spec, names))
