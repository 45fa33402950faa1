"""Command line entry point: ``onebit-si run | oracle | selftest``."""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .benchmark import run_experiment
from .config import ConfigError, load_config
from .errors import DomainError


def _apply_overrides(cfg, args):
    if args.seed is not None:
        cfg = replace(cfg, scenario=replace(cfg.scenario, seed=args.seed))
    kw = {}
    if args.trials is not None:
        kw["trials"] = args.trials
    if args.threads is not None:
        kw["threads"] = args.threads
    if args.timing:
        kw["timing"] = True
    return replace(cfg, **kw) if kw else cfg


def cmd_run(args):
    try:
        cfg = _apply_overrides(load_config(args.config), args)
    except (ConfigError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    table = run_experiment(cfg)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            table.to_csv(fh)
    else:
        sys.stdout.write(table.to_csv())
    bad = [r for r in table.rows if r.failures or r.mean_nmse != r.mean_nmse]
    for r in bad:
        print(f"warning: {r.algorithm} at {r.sweep_param}={r.sweep_value}: "
              f"{r.failures} failed trial(s)", file=sys.stderr)
    return 1 if (args.strict and bad) else 0


def _emit(text, out):
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    print(text)


def cmd_oracle(args):
    from .validation.suite import format_report, run_oracle_suite

    results = run_oracle_suite(draws=args.draws, seed=args.seed if args.seed is not None else 20240)
    _emit(format_report(results), args.out)
    return 0 if all(r.passed for r in results) else 1


def cmd_selftest(args):
    from .validation.selftest import run_selftest

    results = run_selftest(seed=args.seed or 0)
    lines = [f"{'PASS' if r.passed else 'FAIL'}  {r.name}" + (f"  ({r.detail})" if r.detail else "")
             for r in results]
    _emit("\n".join(lines), args.out)
    return 0 if all(r.passed for r in results) else 1


def build_parser():
    p = argparse.ArgumentParser(prog="onebit-si", description="Noisy one-bit compressed sensing with side information")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed")
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--strict", action="store_true",
                        help="exit 1 if any trial failed")

    r = sub.add_parser("run", parents=[common], help="run an experiment config, write CSV")
    r.add_argument("config", help="TOML experiment file")
    r.add_argument("--trials", type=int, default=None)
    r.add_argument("--threads", type=int, default=None)
    r.add_argument("--timing", action="store_true", help="fill mean_runtime_ms (output no longer reproducible)")
    r.set_defaults(func=cmd_run)

    o = sub.add_parser("oracle", parents=[common], help="closed forms versus quadrature")
    o.add_argument("--draws", type=int, default=500, help="random parameter draws per formula")
    o.set_defaults(func=cmd_oracle)

    s = sub.add_parser("selftest", parents=[common], help="fast invariant checks")
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
