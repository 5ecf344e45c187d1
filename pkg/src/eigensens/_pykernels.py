"""Pure numpy implementations of the compiled kernels in ``_ckernels.pyx``.

Used when the extension is not built, or when ``EIGENSENS_BACKEND=python``.
"""
import numpy as np
from scipy.special import ndtr

_BLOCK_ELEMS = 1 << 22
_INV_SQRT2PI = 0.39894228040143267794


def _blocks(m, n, d):
    step = max(1, _BLOCK_ELEMS // max(1, n * d))
    for start in range(0, m, step):
        yield start, min(m, start + step)


def kde_cdf(samples, bandwidth, points):
    samples = np.asarray(samples, dtype=np.float64)
    points = np.asarray(points, dtype=np.float64)
    n, d = samples.shape
    out = np.empty(points.shape[0])
    for lo, hi in _blocks(points.shape[0], n, d):
        z = (points[lo:hi, None, :] - samples[None, :, :]) / bandwidth
        out[lo:hi] = ndtr(z).prod(axis=2).sum(axis=1) / n
    return out


def kde_pdf(samples, bandwidth, points):
    samples = np.asarray(samples, dtype=np.float64)
    points = np.asarray(points, dtype=np.float64)
    n, d = samples.shape
    norm = np.prod(_INV_SQRT2PI / np.asarray(bandwidth))
    out = np.empty(points.shape[0])
    for lo, hi in _blocks(points.shape[0], n, d):
        z = (points[lo:hi, None, :] - samples[None, :, :]) / bandwidth
        out[lo:hi] = norm * np.exp(-0.5 * (z * z).sum(axis=2)).sum(axis=1) / n
    return out


def _khatri_rao(factors):
    # row-wise outer product, first factor slowest
    out = factors[0]
    for f in factors[1:]:
        out = (out[:, :, None] * f[:, None, :]).reshape(out.shape[0], -1)
    return out


def product_accumulate(increments, start, stop):
    increments = np.asarray(increments, dtype=np.float64)
    d = increments.shape[0]
    block = [increments[k, start:stop, :] for k in range(d)]
    if d == 1:
        return block[0].sum(axis=0)
    split = d // 2
    left = _khatri_rao(block[:split])
    right = _khatri_rao(block[split:])
    return (left.T @ right).ravel()


def reference_subtract(corner_cdf, B, d):
    corner = np.asarray(corner_cdf, dtype=np.float64)
    prob = np.zeros(B**d)
    cube = prob.reshape((B,) * d)
    for c, idx in enumerate(np.ndindex(*(B,) * d)):
        box = tuple(slice(0, i + 1) for i in idx)
        # the current cell is still zero, so the box sum covers predecessors only
        prob[c] = corner[c] - cube[box].sum()
    return prob
