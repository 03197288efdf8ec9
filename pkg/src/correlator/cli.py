"""Command line entry point.

``correlator run <preset|config> [--seed N] [--out DIR] [--oracle-max-qubits N]``
and ``correlator selftest``. Exit status 0 means success, 1 a configuration
or resource problem caught before computing, 2 a failed numerical gate.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from .config import ExperimentConfig, load_preset, preset_names, resolve_config, validate
from .exceptions import ConfigurationError, CorrelatorError, ResourceError
from .experiments import run_experiment
from .statevector import DEFAULT_ORACLE_MAX_QUBITS

EXIT_OK, EXIT_VALIDATION, EXIT_GATE = 0, 1, 2

log = logging.getLogger("correlator")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="correlator", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a preset name or TOML file")
    run.add_argument("config", help=f"preset ({', '.join(preset_names())}) or path to a TOML config")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("--out", type=Path, default=None, help="output directory")
    run.add_argument("--oracle-max-qubits", type=_positive_int, default=DEFAULT_ORACLE_MAX_QUBITS,
                     help="largest register the dense oracle and exact backend may diagonalize")

    st = sub.add_parser("selftest", help="random nested brackets against dense matrices")
    st.add_argument("--seed", type=int, default=None)
    st.add_argument("--cases", type=_positive_int, default=None)
    st.add_argument("--out", type=Path, default=None)
    st.add_argument("--oracle-max-qubits", type=_positive_int, default=DEFAULT_ORACLE_MAX_QUBITS)
    return parser


def _apply_overrides(cfg: ExperimentConfig, seed: int | None, cases: int | None = None) -> ExperimentConfig:
    if seed is not None:
        cfg = dataclasses.replace(cfg, seed=seed)
    if cases is not None:
        cfg = dataclasses.replace(cfg, model=dataclasses.replace(cfg.model, cases=cases))
    validate(cfg)
    return cfg


def _output_dir(cfg: ExperimentConfig, out: Path | None) -> Path:
    if out is not None:
        return out
    if cfg.output_dir:
        return Path(cfg.output_dir)
    return Path("runs") / cfg.experiment


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "run":
            cfg = _apply_overrides(resolve_config(args.config), args.seed)
        else:
            cfg = _apply_overrides(load_preset("selftest"), args.seed, args.cases)
        out = _output_dir(cfg, args.out)
        log.info("running %s into %s", cfg.experiment, out)
        result = run_experiment(cfg, out, args.oracle_max_qubits)
    except (ConfigurationError, ResourceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CorrelatorError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_GATE
    summary = {k: v for k, v in result.summary.items() if k != "files"}
    print(json.dumps(summary, indent=2, sort_keys=True, default=str))
    if not result.gate_passed:
        print("numerical gate failed", file=sys.stderr)
        return EXIT_GATE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
