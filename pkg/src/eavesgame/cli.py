"""Command-line front end.

    eavesgame solve <mode> --config FILE [--set key=value]... [--seed N]
                    [--samples N] [--verify] [--strict] --out PATH --format csv|json
    eavesgame reproduce <target> --out PATH [--format csv|json] [--samples N] [--seed N]

Exit codes: 0 success, 2 config error, 3 solver precondition failure,
4 verification failure under ``--verify --strict``.
"""

from __future__ import annotations

import argparse
import sys
import time
from typing import List, Optional

from . import __version__
from .config import MODES, ConfigError, load_config
from .experiments import TARGETS, SolverPreconditionError, reproduce, run, write_artifact

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PRECONDITION = 3
EXIT_VERIFY = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eavesgame", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    solve = sub.add_parser("solve", help="solve one configured game or sweep")
    solve.add_argument("mode", choices=[m for m in MODES])
    solve.add_argument("--config", required=True, help="YAML or JSON config file")
    solve.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config value (dotted key, e.g. params.c=5)")
    solve.add_argument("--seed", type=int, help="Monte Carlo seed")
    solve.add_argument("--samples", type=int, help="Monte Carlo sample count")
    solve.add_argument("--verify", action="store_true", help="attach oracle verdicts to each row")
    solve.add_argument("--strict", action="store_true", help="exit 4 if any verdict fails")
    solve.add_argument("--out", help="output path (default: output.path from the config)")
    solve.add_argument("--format", choices=["csv", "json"], help="output format")
    solve.add_argument("--workers", type=int, help="worker processes (default: $EAVESGAME_WORKERS or 1)")

    rep = sub.add_parser("reproduce", help="emit the data behind a named example or figure")
    rep.add_argument("target", help=f"one of: {', '.join(TARGETS)}")
    rep.add_argument("--out", required=True)
    rep.add_argument("--format", choices=["csv", "json"], default="csv")
    rep.add_argument("--samples", type=int, help="Monte Carlo sample count for sampled targets")
    rep.add_argument("--seed", type=int, default=0)
    rep.add_argument("--workers", type=int)
    return parser


def _solve(args) -> int:
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"mc.seed={args.seed}")
    if args.samples is not None:
        overrides.append(f"mc.n_samples={args.samples}")
    overrides.append(f"mode={args.mode}")
    cfg = load_config(args.config, overrides)
    out = args.out or cfg.out_path
    if not out:
        raise ConfigError("no output path (use --out or output.path)", "output.path")
    fmt = args.format or cfg.out_format
    art = run(cfg, verify=args.verify, workers=args.workers)
    write_artifact(art, out, fmt)
    if args.verify and args.strict and not art.all_verified:
        bad = [r.get("index") for r in art.rows if r.get("verified") is False]
        print(f"eavesgame: verification failed for rows {bad}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def _reproduce(args) -> int:
    if args.samples is not None and args.samples < 1:
        raise ConfigError("--samples must be >= 1", "--samples")
    art = reproduce(args.target, n_samples=args.samples, seed=args.seed, workers=args.workers)
    write_artifact(art, args.out, args.format)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "workers", None) is not None and args.workers < 1:
        print("eavesgame: error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    start = time.perf_counter()
    try:
        code = _solve(args) if args.command == "solve" else _reproduce(args)
    except ConfigError as exc:
        print(f"eavesgame: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverPreconditionError as exc:
        print(f"eavesgame: solver precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except OSError as exc:
        print(f"eavesgame: cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    # timing goes to stderr so output files stay byte-identical across runs
    print(f"eavesgame: done in {time.perf_counter() - start:.2f} s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
