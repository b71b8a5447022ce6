"""Command-line entry point mirroring the pipeline stages.

Exit codes: 0 success, 1 usage error, 2 data or validation error,
3 runtime failure. Diagnostics go to stderr; data goes to files or stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import ConfigError, DataError
from .green import EnergyParams, build_report
from .ingest import (
    dataset_stats,
    parse_interactions,
    resolve_data_path,
    write_canonical_csv,
)
from .preprocess import preprocess_pipeline
from .report import DEFAULT_GROUPS, emit_report
from .runner import ExperimentConfig, load_results, run_grid
from .split import SplitRatios, save_bundle, user_holdout_split

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: A003 - argparse hook
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="greenlens", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="parse a raw ratings file to canonical CSV")
    p.add_argument("--in", dest="input", required=True, help="raw dataset file")
    p.add_argument("--format", required=True, help="ml100k_tsv | ml_dat | amazon_csv | canonical_csv")
    p.add_argument("--column-order", help="comma-separated field names for amazon_csv")
    p.add_argument("--out", required=True, help="canonical CSV output path")

    p = sub.add_parser("preprocess", help="dedup, average, and k-core prune")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--format", required=True)
    p.add_argument("--column-order")
    p.add_argument("--k", type=int, default=10, help="k-core threshold (default 10)")
    p.add_argument("--out", required=True, help="canonical CSV output path")

    p = sub.add_parser("split", help="user-based holdout split")
    p.add_argument("--in", dest="input", required=True, help="preprocessed canonical CSV")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--test-frac", type=float, default=0.1)
    p.add_argument("--valid-frac", type=float, default=0.1)

    p = sub.add_parser("run", help="execute an experiment grid")
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--jobs", type=int, help="worker pool width (overrides config)")
    p.add_argument("--exclusive-timing", action="store_true", help="run cells one at a time")
    p.add_argument("--output-dir", help="overrides the config's output_dir")

    p = sub.add_parser("report", help="aggregate results into CSVs and charts")
    p.add_argument("--results", required=True, help="results.csv from a grid run")
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("estimate", help="CO2e savings for a runtime ratio")
    p.add_argument("--runtime-ratio", type=float, required=True)
    p.add_argument("--kwh-per-run", type=float, default=0.51)
    p.add_argument("--n-configs", type=int, default=10)
    p.add_argument("--intensity", type=float, default=481.0)
    p.add_argument("--overhead-factor", type=float, default=40.0)
    p.add_argument("--device-power-watts", type=float, default=200.0)

    return parser


def _column_order(raw: str | None):
    return [c.strip() for c in raw.split(",")] if raw else None


def _cmd_ingest(args) -> int:
    ds = parse_interactions(resolve_data_path(args.input), args.format, _column_order(args.column_order))
    write_canonical_csv(ds, args.out)
    if len(ds):
        print(json.dumps(dataset_stats(ds).as_dict()))
    return EXIT_OK


def _cmd_preprocess(args) -> int:
    ds = parse_interactions(resolve_data_path(args.input), args.format, _column_order(args.column_order))
    before = dataset_stats(ds).as_dict() if len(ds) else None
    out_ds = preprocess_pipeline(ds, args.k)
    after = dataset_stats(out_ds).as_dict() if len(out_ds) else None
    write_canonical_csv(out_ds, args.out)
    print(json.dumps({"before": before, "after": after}))
    return EXIT_OK


def _cmd_split(args) -> int:
    from .ingest import read_canonical_csv

    ds = read_canonical_csv(resolve_data_path(args.input))
    bundle = user_holdout_split(ds, SplitRatios(args.test_frac, args.valid_frac), args.seed)
    save_bundle(bundle, args.out_dir)
    return EXIT_OK


def _cmd_run(args) -> int:
    config = ExperimentConfig.from_json(args.config)
    if args.jobs is not None:
        config.jobs = args.jobs
    if args.exclusive_timing:
        config.exclusive_timing = True
    if args.output_dir:
        config.output_dir = args.output_dir
    config.validate()
    records = run_grid(config)
    ok = sum(1 for r in records if r.status == "ok")
    print(
        f"grid complete: {len(records)} cells, {ok} ok, {len(records) - ok} failed "
        f"(results in {Path(config.output_dir) / 'results.csv'})",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_report(args) -> int:
    records = load_results(args.results)
    written = emit_report(records, DEFAULT_GROUPS, args.out_dir)
    for path in written:
        print(path)
    return EXIT_OK


def _cmd_estimate(args) -> int:
    params = EnergyParams(
        kwh_per_run=args.kwh_per_run,
        n_configs=args.n_configs,
        intensity_g_per_kwh=args.intensity,
        overhead_factor=args.overhead_factor,
        device_power_watts=args.device_power_watts,
    )
    report = build_report(args.runtime_ratio, params)
    print(json.dumps(report.as_dict(), indent=2))
    return EXIT_OK


_HANDLERS = {
    "ingest": _cmd_ingest,
    "preprocess": _cmd_preprocess,
    "split": _cmd_split,
    "run": _cmd_run,
    "report": _cmd_report,
    "estimate": _cmd_estimate,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(levelname)s %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        # argparse exits directly for --help / --version
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.command](args)
    except (DataError, ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive
        print(f"failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
