"""Command-line front end for the sweep harness.

Subcommands select the application family; the experiment, sweep and
parameters come from a TOML config (or the built-in defaults) with
command-line overrides on top: flag > config file > default. Exit codes:
0 success, 1 runtime/solver failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .harness import (EXPERIMENTS, ExperimentConfig, MODES, run_experiment,
                      write_csv, write_plots)

FAMILY_DEFAULT = {
    "radar-comm": "radar_comm_sigma_d",
    "d2d": "d2d_power",
    "pls": "pls_sigma_de",
}
CONFIG_KEYS = {"experiment", "sweep", "trials", "seed", "modes", "params", "workers"}


class UsageError(Exception):
    pass


def _load_config(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config file not found: {path}")
    with open(p, "rb") as fh:
        data = tomllib.load(fh)
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)} "
                         f"(allowed: {sorted(CONFIG_KEYS)})")
    return data


def _parse_overrides(pairs) -> dict:
    out = {}
    for item in pairs or ():
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"--set expects key=value, got {item!r}")
        try:
            out[key] = float(value)
        except ValueError as exc:
            raise UsageError(f"--set {key}: value {value!r} is not numeric") from exc
    return out


def _build_config(args, experiment: str) -> ExperimentConfig:
    file_cfg = _load_config(args.config) if args.config else {}
    if args.config and "experiment" in file_cfg:
        experiment = file_cfg["experiment"]
    if experiment not in EXPERIMENTS:
        raise UsageError(f"unknown experiment {experiment!r}")
    if args.command != "all":
        want = {"radar-comm": "radar_comm", "d2d": "d2d", "pls": "pls"}[args.command]
        if EXPERIMENTS[experiment].family != want:
            raise UsageError(f"experiment {experiment!r} belongs to the "
                             f"{EXPERIMENTS[experiment].family!r} family, "
                             f"not {args.command!r}")

    params = dict(file_cfg.get("params", {}))
    params.update(_parse_overrides(args.set))

    if args.mode == "both" or args.mode is None and "modes" not in file_cfg:
        modes = MODES
    elif args.mode is not None:
        modes = (args.mode,)
    else:
        modes = tuple(file_cfg["modes"])

    try:
        return ExperimentConfig(
            experiment=experiment,
            sweep=tuple(file_cfg.get("sweep", ())),
            trials=int(args.trials if args.trials is not None
                       else file_cfg.get("trials", 0)),
            seed=int(args.seed if args.seed is not None else file_cfg.get("seed", 0)),
            modes=modes,
            params=params,
            workers=int(args.workers if args.workers is not None
                        else file_cfg.get("workers", 1)),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _print_config(cfg: ExperimentConfig, out_csv: Path) -> None:
    print(f"experiment: {cfg.experiment}")
    print(f"  sweep {cfg.spec.sweep_param} = {list(cfg.sweep)}")
    print(f"  trials={cfg.trials} seed={cfg.seed} workers={cfg.workers} "
          f"modes={list(cfg.modes)}")
    for key in sorted(cfg.params):
        print(f"  {key} = {cfg.params[key]:g}")
    print(f"  output: {out_csv}")


def _run_one(cfg: ExperimentConfig, out_dir: Path, stem: str, plots: bool) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    out_csv = out_dir / f"{stem}.csv"
    _print_config(cfg, out_csv)
    result = run_experiment(cfg)
    write_csv(result, out_csv)
    if plots:
        for svg in write_plots(result, out_csv):
            print(f"  wrote {svg}")
    print(f"  wrote {out_csv}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aris-opt",
        description="Reflection-coefficient design sweeps for absorptive "
                    "reconfigurable surfaces.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("radar-comm", "interference-channel suppression sweeps"),
            ("d2d", "worst-link SINR sweeps"),
            ("pls", "secrecy-rate sweeps"),
            ("all", "run every experiment at desk scale")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="TOML experiment config")
        p.add_argument("--experiment", help="experiment name (overrides the "
                                            "subcommand default)")
        p.add_argument("--trials", type=int, help="Monte-Carlo trials per sweep point")
        p.add_argument("--seed", type=int, help="base seed for channel draws")
        p.add_argument("--out-dir", default=".", help="output directory")
        p.add_argument("--mode", choices=["aris", "conventional", "both"],
                       help="which designs to run (default both)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a scenario parameter (repeatable)")
        p.add_argument("--workers", type=int, help="parallel trial workers")
        p.add_argument("--plots", action="store_true", help="also write SVG charts")
    return parser


def parse_and_dispatch(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out_dir = Path(args.out_dir)
    try:
        if args.command == "all":
            if args.config:
                raise UsageError("--config is not supported with 'all'; "
                                 "run experiments individually")
            for name in EXPERIMENTS:
                cfg = _build_config(args, name)
                _run_one(cfg, out_dir, name, args.plots)
        else:
            experiment = args.experiment or FAMILY_DEFAULT[args.command]
            cfg = _build_config(args, experiment)
            stem = Path(args.config).stem if args.config else cfg.experiment
            _run_one(cfg, out_dir, stem, args.plots)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"aris-opt: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 -- runtime failure -> exit 1
        print(f"aris-opt: runtime failure: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(parse_and_dispatch())
