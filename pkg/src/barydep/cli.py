"""Command-line entry point.

Exit codes: 0 on success, 2 on configuration errors, 3 on data errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import BarydepError, InvalidInput
from .pipeline import RunConfig, run


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="barydep",
        description="Quantify directional dependencies between time-series "
                    "variables via barycentric affiliations.",
    )
    parser.add_argument("--mode", required=True,
                        choices=("logistic", "sde", "ar", "csv"))
    parser.add_argument("--k", type=int, default=10,
                        help="landmarks per variable (ignored in csv mode)")
    parser.add_argument("--tau", type=_parse_int_list, default=(1,),
                        help="comma-separated time shifts, e.g. 1,3,10")
    parser.add_argument("--t", type=int, default=None, dest="length",
                        help="series length / step count (mode default if omitted)")
    parser.add_argument("--realisations", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--diff", action=argparse.BooleanOptionalAction,
                        default=None,
                        help="analyse first differences (default: only in sde mode)")
    parser.add_argument("--sigma-ab", type=float, default=0.2,
                        help="noise level of the driven diffusions (sde mode)")
    parser.add_argument("--restarts", type=int, default=5,
                        help="landmark fit restarts per variable")
    parser.add_argument("--spa-max-iters", type=int, default=500,
                        help="alternation budget of the landmark fit")
    parser.add_argument("--prefix-sweep", type=_parse_int_list, default=None,
                        help="comma-separated prefix lengths to refit mappings on")
    parser.add_argument("--csv", type=str, default=None,
                        help="tracking CSV file (csv mode)")
    parser.add_argument("--schema", type=str, default=None,
                        help="JSON file describing the tracking CSV columns and teams")
    parser.add_argument("--jobs", type=int, default=1,
                        help="concurrent realisations")
    parser.add_argument("--out", type=str, default=None,
                        help="directory for report.json and CSV tables")
    return parser


def _load_schema(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InvalidInput(f"cannot read schema file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"schema file {path} is not valid JSON: {exc}") from exc


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        schema = _load_schema(args.schema) if args.schema else None
        config = RunConfig(
            mode=args.mode,
            k=args.k,
            taus=args.tau,
            difference_series=args.diff,
            realisations=args.realisations,
            seed=args.seed,
            length=args.length,
            prefix_lengths=args.prefix_sweep,
            output_dir=args.out,
            restarts=args.restarts,
            spa_max_iters=args.spa_max_iters,
            jobs=args.jobs,
            sigma_ab=args.sigma_ab,
            csv_path=args.csv,
            csv_schema=schema,
        )
    except InvalidInput as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        summary = run(config)
    except BarydepError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    for (tau, src, tgt), stats in sorted(summary.pair_stats.items()):
        line = (f"tau={tau} {src}->{tgt}: "
                f"mean delta(schatten1)={stats.mean_delta_schatten:+.4f} "
                f"mean delta(row variance)={stats.mean_delta_rowvar:+.4f}")
        if stats.incorrect_schatten is not None:
            line += (f" incorrect={stats.incorrect_schatten}"
                     f"/{stats.incorrect_rowvar} of {len(stats.delta_schatten)}")
        print(line)
    if summary.warnings:
        for warning in summary.warnings:
            print(f"warning: {warning}", file=sys.stderr)
    if config.output_dir:
        print(f"report written to {config.output_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
