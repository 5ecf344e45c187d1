"""Command-line entry point: ``eigensens {simulate,mi,sensitivity,table}``.

Exit codes: 0 success, 1 usage or validation error, 2 I/O error,
3 numerical failure (degenerate column, empty grid, complex eigenvalues).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import itertools
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__, sdmodel
from ._backend import BACKEND
from .dataset import Y_MAX, read_csv, to_csv
from .errors import NumericalError, ValidationError
from .grid import DEFAULT_BINS, DEFAULT_SPAN, build_grid, write_grid_csv
from .infotheory import MiResult, mutual_information
from .kde import BandwidthSpec, fit
from .sensitivity import PipelineConfig, leave_one_out, normalized_matrix, total_mi

log = logging.getLogger("eigensens")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3
FORMATS = ("text", "json", "csv")
MAX_TABLE_INPUTS = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _names(text: str) -> list[str]:
    names = [t.strip() for t in text.split(",") if t.strip()]
    if not names:
        raise argparse.ArgumentTypeError("expected a comma-separated list of column names")
    return names


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {v}")
    return v


def _bandwidth(text: str) -> BandwidthSpec:
    try:
        return BandwidthSpec.parse(text)
    except ValidationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _num(v) -> str:
    return "" if v is None else repr(float(v))


def _digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _manifest(command, config: dict, args, started: float) -> dict:
    # Thread count is left out on purpose: results do not depend on it.
    return {
        "command": command,
        "config": config,
        "seed": args.seed,
        "input_digest": _digest(args.input) if getattr(args, "input", None) else None,
        "version": __version__,
        "backend": BACKEND,
        "duration_seconds": round(time.perf_counter() - started, 6),
    }


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="")


def _config(args, inputs, outputs) -> PipelineConfig:
    return PipelineConfig(
        inputs=tuple(inputs),
        outputs=tuple(outputs),
        bins=args.bins,
        bandwidth=args.bandwidth,
        span=args.span,
        threads=args.threads,
    )


def _load(args, outputs):
    return read_csv(args.input, outputs=outputs)


# --- formatting -----------------------------------------------------------

def _mi_rows(mi: MiResult) -> list[tuple[str, str]]:
    rows = [
        ("left", " ".join(mi.left)),
        ("right", " ".join(mi.right)),
        ("raw_bits", _num(mi.raw_bits)),
        ("normalized", _num(mi.normalized)),
        ("joint_entropy", _num(mi.joint_entropy)),
        ("divisor", _num(mi.divisor)),
        ("coverage", _num(mi.coverage)),
    ]
    rows += [(f"entropy[{k}]", _num(v)) for k, v in mi.marginal_entropies.items()]
    return rows


def _csv_text(header, rows, manifest=None) -> str:
    buf = io.StringIO()
    if manifest is not None:
        buf.write("# manifest " + json.dumps(manifest, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _manifest_text(manifest) -> str:
    return "".join(f"# {k}: {json.dumps(v, sort_keys=True)}\n" for k, v in manifest.items())


def format_mi(mi: MiResult, manifest: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps({"manifest": manifest, "mi": mi.to_dict()}, indent=2, sort_keys=True) + "\n"
    rows = _mi_rows(mi)
    if fmt == "csv":
        return _csv_text([k for k, _ in rows], [[v for _, v in rows]], manifest)
    width = max(len(k) for k, _ in rows)
    return "".join(f"{k:<{width}}  {v}\n" for k, v in rows) + _manifest_text(manifest)


def format_report(report, manifest: dict, fmt: str) -> str:
    if fmt == "json":
        payload = {"manifest": manifest, **report.to_dict()}
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    rank = {name: i + 1 for i, name in enumerate(report.ranking)}
    full = report.full_mi
    header = ["record", "name", "raw_bits", "normalized", "sensitivity_bits",
              "sensitivity_normalized", "rank"]
    rows = [["full", "", _num(full.raw_bits), _num(full.normalized), "", "", ""]]
    for e in report.per_input:
        rows.append(["without", e.name, _num(e.mi_without.raw_bits), _num(e.mi_without.normalized),
                     _num(e.sensitivity_bits), _num(e.sensitivity_normalized), str(rank[e.name])])
    if fmt == "csv":
        return _csv_text(header, rows, manifest)
    lines = [f"full MI: {_num(full.raw_bits)} bits (normalized {_num(full.normalized)})",
             f"{'rank':>4}  {'input':<10} {'sensitivity_bits':>22} {'normalized':>22} {'mi_without_bits':>22}"]
    for name in report.ranking:
        e = report.entry(name)
        lines.append(f"{rank[name]:>4}  {name:<10} {_num(e.sensitivity_bits):>22} "
                     f"{_num(e.sensitivity_normalized):>22} {_num(e.mi_without.raw_bits):>22}")
    return "\n".join(lines) + "\n" + _manifest_text(manifest)


def _subset_label(names) -> str:
    return " & ".join(names)


def format_table(columns, outputs, manifest: dict, fmt: str) -> str:
    if fmt == "json":
        payload = {
            "manifest": manifest,
            "outputs": list(outputs),
            "columns": [{"inputs": list(s), "mi": mi.to_dict()} for s, mi in columns],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    header = [_subset_label(outputs)] + [_subset_label(s) for s, _ in columns]
    rows = [["raw_bits"] + [_num(mi.raw_bits) for _, mi in columns],
            ["normalized"] + [_num(mi.normalized) for _, mi in columns]]
    if fmt == "csv":
        return _csv_text(header, rows, manifest)
    cells = [header] + rows
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    body = "".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n" for r in cells)
    return body + _manifest_text(manifest)


# --- commands -------------------------------------------------------------

def cmd_simulate(args) -> int:
    if args.samples < 2:
        raise UsageError(f"--samples must be >= 2, got {args.samples}")
    if args.out is None:
        raise UsageError("simulate requires --out")
    dataset = sdmodel.generate_dataset(args.samples, args.seed)
    to_csv(dataset, args.out)
    log.info("wrote %d rows to %s", dataset.n_rows, args.out)
    return EXIT_OK


def cmd_mi(args) -> int:
    started = time.perf_counter()
    dataset = _load(args, args.right)
    config = _config(args, args.left, args.right)
    if args.dump_grid:
        names = config.variables
        norm = normalized_matrix(dataset, names)
        grid = build_grid(fit(norm.values, config.bandwidth, names), config.grid_config,
                          names, threads=config.threads)
        write_grid_csv(grid, args.dump_grid)
        mi = mutual_information(grid, config.inputs, config.outputs)
    else:
        mi = total_mi(dataset, config)
    _emit(format_mi(mi, _manifest("mi", config.to_dict(), args, started), args.format), args.out)
    return EXIT_OK


def cmd_sensitivity(args) -> int:
    started = time.perf_counter()
    dataset = _load(args, args.outputs)
    config = _config(args, args.inputs, args.outputs)
    report = leave_one_out(dataset, config)
    manifest = _manifest("sensitivity", config.to_dict(), args, started)
    _emit(format_report(report, manifest, args.format), args.out)
    return EXIT_OK


def default_table_inputs(dataset, outputs) -> list[str]:
    """Every column not used as an output; eigenvalue columns are skipped when ``y_max`` is."""
    skip = set(outputs)
    if Y_MAX in skip:
        skip |= {"y1", "y2"}
    return [n for n in dataset.names if n not in skip]


def input_subsets(inputs):
    """Non-empty subsets, by size then in input order."""
    return [c for r in range(1, len(inputs) + 1) for c in itertools.combinations(inputs, r)]


def cmd_table(args) -> int:
    started = time.perf_counter()
    dataset = _load(args, args.outputs)
    inputs = args.inputs or default_table_inputs(dataset, args.outputs)
    if len(inputs) > MAX_TABLE_INPUTS:
        raise UsageError(f"table supports at most {MAX_TABLE_INPUTS} inputs, got {len(inputs)}")
    full = _config(args, inputs, args.outputs)
    columns = [(s, total_mi(dataset, full.replace(inputs=s))) for s in input_subsets(inputs)]
    manifest = _manifest("table", full.to_dict(), args, started)
    _emit(format_table(columns, args.outputs, manifest, args.format), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eigensens", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="sample the two-stock model and write a dataset CSV")
    sim.add_argument("--samples", type=int, default=12000)
    sim.add_argument("--seed", type=int, default=42)
    sim.add_argument("--out", required=False)
    sim.set_defaults(func=cmd_simulate)

    def analysis(p):
        p.add_argument("--input", required=True, help="dataset CSV")
        p.add_argument("--bins", type=_positive_int, default=DEFAULT_BINS)
        p.add_argument("--bandwidth", type=_bandwidth, default=BandwidthSpec(),
                       help="'silverman' (default) or 'cv-ls[:budget]'")
        p.add_argument("--span", type=float, default=DEFAULT_SPAN)
        p.add_argument("--format", choices=FORMATS, default="text")
        p.add_argument("--threads", type=_positive_int, default=1)
        p.add_argument("--seed", type=int, default=None, help="recorded in the manifest")
        p.add_argument("--out", default=None, help="write the report here instead of stdout")

    mi = sub.add_parser("mi", help="mutual information between two variable sets")
    analysis(mi)
    mi.add_argument("--left", type=_names, required=True)
    mi.add_argument("--right", type=_names, required=True)
    mi.add_argument("--dump-grid", default=None, help="also write the probability grid as CSV")
    mi.set_defaults(func=cmd_mi)

    sens = sub.add_parser("sensitivity", help="leave-one-out sensitivity ranking of the inputs")
    analysis(sens)
    sens.add_argument("--inputs", type=_names, required=True)
    sens.add_argument("--outputs", type=_names, required=True)
    sens.set_defaults(func=cmd_sensitivity)

    table = sub.add_parser("table", help="MI of every input subset against the outputs")
    analysis(table)
    table.add_argument("--inputs", type=_names, default=None)
    table.add_argument("--outputs", type=_names, required=True)
    table.set_defaults(func=cmd_table)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
