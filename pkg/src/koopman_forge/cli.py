"""``forge`` command line: ``forge run --suite NAME`` and ``forge list``.

Exit status is 0 when every check passes, 1 when any fails or errors and 2
for usage or configuration problems.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import registry
from .report import ConfigError, dumps, run, summary_line, write_tables

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

CONFIG_KEYS = {"suite", "n", "seed", "dt", "T", "trials", "ordering", "tolerances", "report", "csv", "figures"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="forge", description="Check the operator identities and numerical claims.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    r = sub.add_parser("run", help="run a suite of checks")
    r.add_argument("--suite", required=True, choices=registry.SUITES + ("all",))
    r.add_argument("--config", type=Path, help="JSON file with SuiteConfig fields")
    r.add_argument("--seed", type=int)
    r.add_argument("--report", type=Path, help="write the JSON report here")
    r.add_argument("--csv", type=Path, help="directory for CSV tables and figures")
    r.add_argument("--no-figures", action="store_true", help="write CSV tables only")
    r.add_argument("--timings", action="store_true", help="record per-check wall time in the report")
    r.add_argument("--quiet", action="store_true")
    sub.add_parser("list", help="print every check id with its anchor")
    return p


def load_config(args) -> registry.SuiteConfig:
    data = {}
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    data["suite"] = args.suite
    if "n" in data:
        data["n"] = tuple(data["n"]) if isinstance(data["n"], list) else (data["n"],)
    env_seed = os.environ.get("FORGE_SEED")
    if env_seed is not None:
        try:
            data["seed"] = int(env_seed)
        except ValueError as exc:
            raise ConfigError(f"FORGE_SEED must be an integer, got {env_seed!r}") from exc
    if args.seed is not None:
        data["seed"] = args.seed
    if args.report is not None:
        data["report"] = str(args.report)
    if args.csv is not None:
        data["csv"] = str(args.csv)
    if args.no_figures:
        data["figures"] = False
    try:
        return registry.SuiteConfig(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _prepare_outputs(config: registry.SuiteConfig):
    """Fail before any work if an output location cannot be written."""
    if config.report is not None:
        parent = Path(config.report).resolve().parent
        if not parent.is_dir() or not os.access(parent, os.W_OK):
            raise ConfigError(f"report path {config.report} is not writable")
        if Path(config.report).is_dir():
            raise ConfigError(f"report path {config.report} is a directory")
    if config.csv is not None:
        d = Path(config.csv)
        try:
            d.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create csv directory {d}: {exc}") from exc
        if not os.access(d, os.W_OK):
            raise ConfigError(f"csv directory {d} is not writable")


def cmd_list() -> int:
    for line in registry.listing():
        print(line)
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        config = load_config(args)
        _prepare_outputs(config)
    except ConfigError as exc:
        print(f"forge: {exc}", file=sys.stderr)
        return EXIT_USAGE
    progress = None if args.quiet else (lambda e: print(summary_line(e), flush=True))
    try:
        report, ctx = run(config, timings=args.timings, progress=progress)
    except ConfigError as exc:
        print(f"forge: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if config.report is not None:
            Path(config.report).write_text(dumps(report), encoding="utf-8")
        if config.csv is not None:
            write_tables(ctx.tables, config.csv)
            if config.figures:
                from .plotting import render
                render(ctx.tables, config.csv)
    except OSError as exc:
        print(f"forge: cannot write output: {exc}", file=sys.stderr)
        return EXIT_USAGE
    s = report["summary"]
    print(f"{s['passed']}/{s['total']} passed, {s['failed']} failed, {s['errors']} errors (seed {config.seed})")
    return EXIT_OK if s["allPassed"] else EXIT_FAIL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        return cmd_list()
    return cmd_run(args)


if __name__ == "__main__":
    sys.exit(main())
