"""Command line entry point: ``andna run`` and ``andna snsd-check``."""

import argparse
import sys
from pathlib import Path

from .errors import ScenarioError
from .netsim import SimConfig
from .scenario import run_scenario
from .snsd import parse_snsd_nodes, serialize_line


def cmd_run(args) -> int:
    config = SimConfig(seed=args.seed, link_delay=args.link_delay,
                       sweep_interval=args.sweep_interval, trace=args.trace)
    try:
        result = run_scenario(args.scenario, config)
    except ScenarioError as exc:
        print(f"{args.scenario}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"{args.scenario}: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(result.text)
    if result.errors:
        return 1
    if args.strict and result.rejections:
        return 1
    return 0


def cmd_snsd_check(args) -> int:
    try:
        data = Path(args.file).read_bytes()
    except OSError as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return 2
    result = parse_snsd_nodes(data)
    rows = [(n, f"line {n}: ok {serialize_line(l)}") for n, l in zip(result.linenos, result.lines)]
    rows += [(d.lineno, str(d)) for d in result.diagnostics]
    for _, text in sorted(rows):
        print(text)
    return 1 if result.diagnostics else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="andna", description="ANDNA scenario runner")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario file and print its event log")
    run.add_argument("scenario")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--link-delay", type=int, default=1)
    run.add_argument("--sweep-interval", type=int, default=86400)
    run.add_argument("--strict", action="store_true", help="exit 1 if any operation was rejected")
    run.add_argument("--trace", action="store_true", help="log every message delivery")
    run.set_defaults(func=cmd_run)

    chk = sub.add_parser("snsd-check", help="validate an snsd_nodes file")
    chk.add_argument("file")
    chk.set_defaults(func=cmd_snsd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)
