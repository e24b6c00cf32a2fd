"""Command-line entry point: ``m2sbench {gen,run,analyze,oracle,ingest}``.

Exit codes: 0 success, 1 usage, 2 data error, 3 oracle mismatch.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__, pipeline
from .config import RunConfig, load_config, parse_config
from .errors import FormatError, M2SError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_MISMATCH = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--output-dir", help="root directory for datasets, results and analysis")
    p.add_argument("--seed", type=int, dest="master_seed", help="master seed")
    p.add_argument("--n-range", help="variable counts, e.g. 5..9")
    p.add_argument("--workers", type=int, help="worker processes (also M2S_WORKERS)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override any config key")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="m2sbench", description="MAX 2-SAT hardness benchmark pipeline")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate canonical unique-optimum datasets")
    _common(p)
    p.add_argument("--target", type=int, dest="target_count", help="attempts per n")

    p = sub.add_parser("run", help="run one solver over datasets")
    _common(p)
    p.add_argument("--solver", required=True, choices=pipeline.SOLVERS)
    p.add_argument("--dataset", action="append", help="dataset name (default: n<n> for the configured range)")
    p.add_argument("--gamma", help="hopping rate, or 'auto'")
    p.add_argument("--gamma-from", help="dataset whose auto hopping rate is used")
    p.add_argument("--limit", type=int, help="compute at most this many new records per dataset")
    p.add_argument("--force", action="store_true", help="discard results produced under other hashes")

    p = sub.add_parser("analyze", help="write the CSV bundle and summary report")
    _common(p)
    p.add_argument("--dataset", action="append")
    p.add_argument("--force", action="store_true", help="accept mixed-hash inputs")
    p.add_argument("--strict", action="store_true", help="fail when any output lacks its measures")

    p = sub.add_parser("oracle", help="brute-force cross-checks of every instance")
    _common(p)
    p.add_argument("--dataset", action="append")

    p = sub.add_parser("ingest", help="import an external directory of instance files")
    _common(p)
    p.add_argument("source")
    p.add_argument("--name", required=True, help="dataset name to create")
    p.add_argument("--no-canonicalize", action="store_true")
    return parser


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config)
    lines = list(args.set)
    if args.n_range:
        lines.append(f"n_range={args.n_range}")
    for key in ("output_dir", "master_seed", "workers", "target_count", "gamma", "gamma_from"):
        value = getattr(args, key, None)
        if value is not None:
            lines.append(f"{key}={value}")
    if lines:
        cfg = parse_config(cfg.to_text() + "\n".join(lines) + "\n")
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = resolve_config(args)
    except (FormatError, ValueError, OSError) as exc:
        print(f"m2sbench: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _dispatch(args, cfg)
    except M2SError as exc:
        print(f"m2sbench: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"m2sbench: {exc}", file=sys.stderr)
        return EXIT_DATA


def _dispatch(args, cfg: RunConfig) -> int:
    if args.command == "gen":
        for n, (kept, attempted) in pipeline.generate(cfg).items():
            print(f"n={n} kept={kept} attempted={attempted}")
        return EXIT_OK
    if args.command == "run":
        names = args.dataset or [f"n{n}" for n in cfg.n_values]
        errors = 0
        for name in names:
            computed, skipped = pipeline.run_solver(cfg, args.solver, name, force=args.force, limit=args.limit)
            _, recs = pipeline.read_results(pipeline.results_path(cfg, name, args.solver))
            failed = sum(1 for r in recs.values() if "error" in r)
            errors += failed
            print(f"{name} {args.solver}: computed={computed} skipped={skipped} errors={failed}")
        return EXIT_OK
    if args.command == "analyze":
        out = pipeline.analyze(cfg, args.dataset, force=args.force, strict=args.strict)
        print((out / "summary.txt").read_text(encoding="utf-8"), end="")
        return EXIT_OK
    if args.command == "oracle":
        failures, timing = pipeline.oracle(cfg, args.dataset)
        for n, seconds in timing.items():
            print(f"n={n} mean_seconds_per_instance={seconds:.6f}")
        for line in failures:
            print(f"MISMATCH {line}")
        if failures:
            return EXIT_MISMATCH
        print("oracle: all checks passed")
        return EXIT_OK
    if args.command == "ingest":
        count = pipeline.ingest(args.source, cfg, args.name, canonicalize=not args.no_canonicalize)
        print(f"ingested {count} instances into {pipeline.dataset_dir(cfg, args.name)}")
        return EXIT_OK
    raise AssertionError(args.command)


if __name__ == "__main__":
    sys.exit(main())
