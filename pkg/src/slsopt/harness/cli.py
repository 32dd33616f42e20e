"""Command line entry point: ``slsopt {run,sweep,aggregate,verify}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, ExperimentConfig
from .experiment import ExperimentError, run_experiment, run_sweep, write_aggregate

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slsopt", description="Stochastic line-search optimizers.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one experiment config over its seeds")
    r.add_argument("--config", required=True)
    r.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key (repeatable)")
    r.add_argument("--no-wall-clock", action="store_true", help="leave wall_secs empty")

    s = sub.add_parser("sweep", help="run a config over a parameter grid")
    s.add_argument("--config", required=True)
    s.add_argument("--grid", action="append", default=[], metavar="KEY=V1,V2,...", required=True)
    s.add_argument("--no-wall-clock", action="store_true")

    a = sub.add_parser("aggregate", help="mean and std across per-seed CSV files")
    a.add_argument("inputs", nargs="+")
    a.add_argument("--to", required=True)

    v = sub.add_parser("verify", help="run acceptance checks")
    v.add_argument("--suite", default="quick")
    return p


def _pairs(items: list[str]) -> dict[str, str]:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"expected KEY=VALUE, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def _load(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config)
    overrides = _pairs(getattr(args, "set", []))
    return cfg.with_overrides(overrides) if overrides else cfg


def _cmd_run(args) -> int:
    cfg = _load(args)
    result = run_experiment(cfg, wall_clock=not args.no_wall_clock)
    for p in result.csv_paths:
        print(p)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = _load(args)
    grid = {k: [s.strip() for s in v.split(",") if s.strip()] for k, v in _pairs(args.grid).items()}
    for key, values in grid.items():
        if not values:
            raise ConfigError(f"grid key {key!r} has no values")
    for combo, result in run_sweep(cfg, {k: [_num(x) for x in v] for k, v in grid.items()},
                                   wall_clock=not args.no_wall_clock):
        print(" ".join(f"{k}={v}" for k, v in combo.items()), result.metadata_path.parent)
    return EXIT_OK


def _num(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _cmd_aggregate(args) -> int:
    missing = [p for p in args.inputs if not Path(p).is_file()]
    if missing:
        raise ConfigError(f"input not found: {', '.join(missing)}")
    try:
        write_aggregate(args.inputs, args.to)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    print(args.to)
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .acceptance import SUITES, run_suite

    if args.suite not in SUITES:
        raise ConfigError(f"unknown suite {args.suite!r}; choose from {', '.join(sorted(SUITES))}")
    results = run_suite(args.suite)
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} criteria passed")
    return EXIT_OK if failed == 0 else EXIT_FAILED


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "aggregate": _cmd_aggregate, "verify": _cmd_verify}


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed usage; map its status 2 onto the validation code
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ExperimentError, ValueError, OSError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
