"""Pick the kernel implementation once, at import.

The compiled extension is preferred; setting ``EIGENSENS_BACKEND=python``
forces the numpy fallback (useful for benchmarking and for checking that both
paths agree).

The compiled backend still takes ``product_accumulate`` from the numpy
module: there the sum of outer products is a single BLAS matrix product,
which beats the extension's per-sample loop (see
``benchmarks/bench_kernels.py``). The loop is kept in the extension as a
cross-check.
"""
import os
from types import SimpleNamespace

from . import _pykernels

python_kernels = _pykernels

try:
    from . import _ckernels as compiled_kernels
except ImportError:  # extension not built
    compiled_kernels = None

if compiled_kernels is not None and os.environ.get("EIGENSENS_BACKEND", "").lower() != "python":
    kernels = SimpleNamespace(
        kde_cdf=compiled_kernels.kde_cdf,
        kde_pdf=compiled_kernels.kde_pdf,
        reference_subtract=compiled_kernels.reference_subtract,
        product_accumulate=python_kernels.product_accumulate,
    )
    BACKEND = "cython"
else:
    kernels = python_kernels
    BACKEND = "python"
