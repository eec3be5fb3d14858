"""Command line front end: ``ipf run``, ``ipf sweep`` and ``ipf verify``.

Exit codes: 0 ok, 2 config error, 3 numerical failure, 4 verification failure.
``IPF_OUTPUT_DIR`` overrides the output directory and ``IPF_WORKERS`` the
worker count; neither changes any artifact byte.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

from .artifacts import run_single, run_sweep
from .config import Config, ConfigError, load_config
from .verify import SUITES, run_suites

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VERIFY = 4

log = logging.getLogger("inertial_phasefield")


def _output_dir(cfg: Config, override=None) -> Path:
    return Path(override or os.environ.get("IPF_OUTPUT_DIR") or cfg.outputs.directory)


def _workers(cfg: Config) -> int:
    env = os.environ.get("IPF_WORKERS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"IPF_WORKERS must be an integer, got {env!r}")
        if n < 1:
            raise ConfigError("IPF_WORKERS must be >= 1")
        return n
    return cfg.outputs.workers


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    outcome = run_single(cfg, _output_dir(cfg, args.output))
    if not outcome.ok:
        print(f"integration failed: {outcome.message}", file=sys.stderr)
        print(f"partial artifacts in {outcome.directory}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"wrote artifacts to {outcome.directory}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if cfg.sweep is None:
        raise ConfigError("config has no 'sweep' section", "sweep")
    outcome = run_sweep(cfg, _output_dir(cfg, args.output), workers=_workers(cfg))
    conv = outcome.report.get("convergence")
    if conv:
        print(f"{conv['param']} distances ({conv['norm']}): "
              + ", ".join(f"{d:.3e}" for d in conv["distances"]))
        if conv["direct_errors"] is not None:
            print("errors against the tau = 0 solution: "
                  + ", ".join(f"{d:.3e}" for d in conv["direct_errors"]))
    print(f"wrote artifacts to {outcome.directory}")
    if not outcome.ok:
        print(outcome.message, file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = load_config(args.config) if args.config else Config()
    cfg = cfg.replace(outputs=dataclasses.replace(cfg.outputs, workers=_workers(cfg)))
    if not args.tighten > 0:
        raise ConfigError("--tighten must be positive")
    results = run_suites(cfg, args.suite, tighten=args.tighten,
                         report=lambda r: print(r.line(), flush=True))
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} suites passed")
    return EXIT_VERIFY if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ipf", description="Simulate and check the regularized inertial phase-field system.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate one configuration (a config or a manifest)")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="output directory (overrides config)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run the parameter sweep of a configuration")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="output directory (overrides config)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the property suites and print a pass/fail table")
    p.add_argument("config", nargs="?")
    p.add_argument("--suite", action="append", choices=list(SUITES), metavar="NAME",
                   help=f"suite to run (repeatable); one of {', '.join(SUITES)}")
    p.add_argument("--no-suites", dest="suite", action="store_const", const=[],
                   help="select no suites")
    p.add_argument("--tighten", type=float, default=1.0,
                   help="divide every tolerance by this factor")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
