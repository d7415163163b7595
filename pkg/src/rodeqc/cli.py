"""Command-line driver.

Usage::

    rode-qctl <command> --config FILE [--seed N] [--out DIR] [--override key=value ...]
    rode-qctl validate --config FILE

Exit codes: 0 success, 2 configuration error, 3 numeric failure,
4 nonconvergence (geodesic shooting / optimizer).  The output directory can
also be overridden with the RODEQC_OUT environment variable.
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import sys

import numpy as np

from . import config as cfgmod
from .errors import BranchCutError, ConfigError, NonconvergenceError, NumericError
from .runner import execute

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_NONCONVERGENCE = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rode-qctl",
        description="Simulation, error bounds, geodesics and robust control "
        "for unitary dynamics under bounded Hermitian noise.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in cfgmod.COMMANDS + ("validate",):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="override config.seed")
        p.add_argument("--out", default=None, help="override output directory")
        p.add_argument(
            "--override",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config entry by dotted path, e.g. numeric.samples=10",
        )
    return parser


def _apply_override(cfg: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} is not of the form key=value")
    path, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    keys = path.split(".")
    node = cfg
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError(f"override path {path!r} crosses a non-object")
    node[keys[-1]] = value


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = cfgmod.load_config(args.config)
        cfg = copy.deepcopy(cfg)
        if args.command != "validate":
            cfg["command"] = args.command
        for assignment in args.override:
            _apply_override(cfg, assignment)
        if args.seed is not None:
            cfg["seed"] = args.seed

        if args.command == "validate":
            problems = cfgmod.validate(cfg)
            for p in problems:
                print(p, file=sys.stderr)
            print(f"{len(problems)} problem(s) found")
            return EXIT_CONFIG if problems else EXIT_OK

        out_dir = args.out or os.environ.get("RODEQC_OUT") or cfg.get("output_dir")
        record = execute(cfg, out_dir)
        print(json.dumps(record["summary"], sort_keys=True))
        if record["summary"].get("converged") is False:
            print("warning: solver did not converge", file=sys.stderr)
            return EXIT_NONCONVERGENCE
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonconvergenceError as exc:
        print(f"nonconvergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (NumericError, BranchCutError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
