"""Time the compiled kernels against the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--samples 12000] [--dim 4] [--bins 10] [--repeat 3]

Each row reports the best-of-``repeat`` wall time of the numpy module and the
compiled extension, and the speed-up. The last row times a full product grid
through each backend as the library actually selects it. Inputs are the min-max normalized model dataset, so the sizes match
a real sensitivity run.
"""
import argparse
import sys
import timeit

import numpy as np

from eigensens import _backend, grid, sdmodel
from eigensens.grid import GridConfig, cdf_increments, upper_corners
from eigensens.kde import KdeModel, silverman_bandwidth
from eigensens.sensitivity import normalized_matrix

COLUMNS = ("x1", "x2", "x3", "y_max", "y1", "y2")


def _cases(model, config, points):
    inc = cdf_increments(model, config)
    corner = np.ascontiguousarray(
        _backend.python_kernels.kde_cdf(model.samples, model.bandwidth, upper_corners(config, model.dim)))
    return {
        "kde_cdf": lambda k: k.kde_cdf(model.samples, model.bandwidth, points),
        "kde_pdf": lambda k: k.kde_pdf(model.samples, model.bandwidth, points),
        "product_accumulate": lambda k: k.product_accumulate(inc, 0, model.n),
        "reference_subtract": lambda k: k.reference_subtract(corner, config.bins, model.dim),
    }


def _row(name, best):
    print(f"{name:<20} {best['python']:>11.4f} {best['cython']:>11.4f} {best['python'] / best['cython']:>8.1f}x")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--samples", type=int, default=12000)
    parser.add_argument("--dim", type=int, default=4, choices=range(1, 7))
    parser.add_argument("--bins", type=int, default=10)
    parser.add_argument("--points", type=int, default=2000, help="query points for kde_cdf/kde_pdf")
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args(argv)

    if _backend.compiled_kernels is None:
        print("compiled extension not built; nothing to compare", file=sys.stderr)
        return 1
    data = sdmodel.generate_dataset(args.samples, args.seed)
    samples = normalized_matrix(data, COLUMNS[: args.dim]).values
    model = KdeModel(samples, silverman_bandwidth(samples))
    points = np.random.default_rng(args.seed).random((args.points, args.dim)) * 1.1
    config = GridConfig(bins=args.bins)

    print(f"n={args.samples} d={args.dim} B={args.bins} points={args.points} (best of {args.repeat})")
    print(f"{'kernel':<20} {'python [s]':>11} {'cython [s]':>11} {'speed-up':>9}")
    for name, call in _cases(model, config, points).items():
        best = {}
        for label, mod in (("python", _backend.python_kernels), ("cython", _backend.compiled_kernels)):
            best[label] = min(timeit.repeat(lambda: call(mod), number=1, repeat=args.repeat))
        _row(name, best)
    best = {}
    for label, mod in (("python", _backend.python_kernels), ("cython", _backend.kernels)):
        grid.kernels = mod
        best[label] = min(timeit.repeat(lambda: grid.build_grid(model, config), number=1, repeat=args.repeat))
    _row("build_grid(product)", best)
    return 0


if __name__ == "__main__":
    sys.exit(main())
