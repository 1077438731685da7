"""Command-line entry point.

Subcommands `gate`, `knit` and `sweep` run table-producing experiments from
a YAML config; `oracle` emits the ideal crossing graph and stabilizer
expectations of a protocol schedule. Exit codes: 0 success, 1 config
error, 2 numerical failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np
import yaml

from .experiments import (
    ConfigError,
    ExperimentConfig,
    emit,
    run_experiment,
)
from .oracle import crossings, stabilizer_expectations
from .protocol import build_crossed_square, build_ladder

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


def _load_config(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a mapping")
    return data


def _jobs(args) -> int:
    env = os.environ.get("SPINKNIT_JOBS")
    if args.jobs is not None:
        return args.jobs
    if env is not None:
        return int(env)
    return 1


def _build_experiment_config(args, family: str | None) -> ExperimentConfig:
    data = _load_config(args.config) if args.config else {}
    if args.seed is not None:
        data["master_seed"] = args.seed
    data["jobs"] = _jobs(args)
    if "kind" not in data and family:
        data["kind"] = f"{family}_trace"
    config = ExperimentConfig.from_dict(data)
    if family:
        protocol_kinds = ("delay_compare", "injection_probability")
        ok = config.kind.startswith(family) or (
            family == "knit" and config.kind in protocol_kinds
        )
        if not ok:
            raise ConfigError(
                "kind", f"{config.kind!r} is not a {family} experiment"
            )
    return config


def _write_table(table, args) -> None:
    if args.out is None:
        sys.stdout.write(table.to_csv())
        return
    fmt = "json" if args.out.endswith(".json") else "csv"
    emit(table, fmt, args.out)


def _cmd_experiment(args, family: str | None) -> int:
    config = _build_experiment_config(args, family)
    table = run_experiment(config)
    _write_table(table, args)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    data = _load_config(args.config) if args.config else {}
    structure = data.pop("structure", "crossed_square")
    n = data.pop("chain_length", 9)
    if structure == "crossed_square":
        schedule = build_crossed_square(
            n,
            scenario=data.pop("scenario", "none"),
            delta_t=float(data.pop("delta_t", 0.0)) * np.pi / 2,
            readout=True,
        )
    elif structure == "ladder":
        schedule = build_ladder(n, rounds=int(data.pop("rounds", 1)))
    else:
        raise ConfigError("structure", f"unknown structure {structure!r}")
    if data:
        raise ConfigError(sorted(data)[0], "unknown config field")
    graph = crossings(schedule)
    payload = json.loads(graph.to_json())
    payload["stabilizer_expectations"] = [
        float(v) for v in stabilizer_expectations(graph)
    ]
    text = json.dumps(payload, indent=2) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinknit",
        description=(
            "Spin-chain cluster-state knitting simulator: entangling-gate "
            "traces, protocol runs and disorder sweeps."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("gate", "two-qubit entangling gate experiments"),
        ("knit", "cluster-state protocol experiments"),
        ("sweep", "any parameter sweep experiment"),
        ("oracle", "ideal crossing graph and stabilizers for a schedule"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="YAML experiment config file")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--out", help="output file (.csv or .json)")
        p.add_argument(
            "--jobs",
            type=int,
            help="parallel worker count (or set SPINKNIT_JOBS)",
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "oracle":
            return _cmd_oracle(args)
        family = args.command if args.command != "sweep" else None
        return _cmd_experiment(args, family)
    except (ConfigError, yaml.YAMLError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        if args.config and exc.filename == args.config:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
