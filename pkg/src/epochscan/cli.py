"""Command-line front end.

    epochscan analyze FILE... [--window 28 --c 0.4 --alpha 0.05 --max-ar 10
                               --lags 5,15,20 --out DIR --format json,csv,svg]
    epochscan simulate --process SPEC.json --test ID --mode size|power
                       [--reps N --seed S --alpha 0.05 --out DIR]

The output directory defaults to ``$EPOCHSCAN_OUT_DIR`` and then
``./epochscan-out``. Exit status is 0 only when every requested instrument
produced a complete report; failures are also printed to stderr as one JSON
object per line.
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import dataclass, field
from functools import partial
from typing import Optional, Sequence

from ._parallel import ordered_map
from .epochs import WindowSpec
from .nonlin import BatteryConfig
from .report import (AnalysisConfig, analyze_file, battery_csv, build_report, dumps,
                     epochs_csv, epochs_summary_csv, summary_csv, unitroot_csv, write_atomic)
from .synth import ProcessSpec, empirical_power, empirical_size, parse_test_id
from .unitroot import DEFAULT_RALS_REPLICATIONS, DEFAULT_RALS_SEED

ENV_OUT_DIR = "EPOCHSCAN_OUT_DIR"
DEFAULT_OUT_DIR = "epochscan-out"
EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    inputs: tuple[str, ...] = ()
    window: WindowSpec = WindowSpec()
    p_max: int = 10
    battery: BatteryConfig = BatteryConfig()
    out_dir: str = DEFAULT_OUT_DIR
    formats: frozenset = frozenset({"json", "csv"})
    seed: int = DEFAULT_RALS_SEED
    date_style: str = "iso"
    workers: int = 1
    rals_replications: int = DEFAULT_RALS_REPLICATIONS

    def __post_init__(self):
        if not self.formats:
            raise ValueError("at least one output format is required")
        resolved = [os.path.realpath(p) for p in self.inputs]
        if len(set(resolved)) != len(resolved):
            raise ValueError("input paths must be distinct")
        names = [os.path.splitext(os.path.basename(p))[0] for p in self.inputs]
        if len(set(names)) != len(names):
            raise ValueError("input files must have distinct names (instrument ids)")


def _error(message: str, **extra) -> None:
    print(json.dumps({"error": message, **extra}, sort_keys=True), file=sys.stderr)


def _formats(text: str, allowed: set[str]) -> frozenset:
    fmts = frozenset(f.strip().lower() for f in text.split(",") if f.strip())
    bad = fmts - allowed
    if bad:
        raise argparse.ArgumentTypeError(f"unsupported formats: {sorted(bad)}")
    return fmts


def _lags(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad lag list {text!r}") from None


def _out_dir(arg: Optional[str]) -> str:
    return arg or os.environ.get(ENV_OUT_DIR) or DEFAULT_OUT_DIR


def cmd_analyze(config: RunConfig) -> int:
    analysis = AnalysisConfig(
        window=config.window, p_max=config.p_max, battery=config.battery,
        rals_replications=config.rals_replications, seed=config.seed,
        date_style=config.date_style, svg="svg" in config.formats,
    )
    results = ordered_map(partial(analyze_file, config=analysis), list(config.inputs),
                          config.workers)
    doc = build_report(results, analysis)
    os.makedirs(config.out_dir, exist_ok=True)
    out = lambda name: os.path.join(config.out_dir, name)
    if "json" in config.formats:
        write_atomic(out("report.json"), dumps(doc))
    if "csv" in config.formats:
        write_atomic(out("summary.csv"), summary_csv(doc))
        write_atomic(out("unitroot.csv"), unitroot_csv(doc))
        write_atomic(out("battery.csv"), battery_csv(doc))
        write_atomic(out("epochs_summary.csv"), epochs_summary_csv(doc))
        write_atomic(out("epochs.csv"), epochs_csv(doc))
    for r in results:
        if r.svg is not None:
            write_atomic(out(f"{r.instrument_id}_timeline.svg"), r.svg)
    for err in doc["errors"]:
        _error(err["error"], instrument_id=err["instrument_id"], source=err["source"])
    return EXIT_OK if not doc["errors"] and config.inputs else EXIT_FAILED


def cmd_simulate(config: RunConfig, spec: ProcessSpec, mode: str, test_id: str,
                 replications: int = 1000, alpha: float = 0.05) -> int:
    parse_test_id(test_id)
    run = empirical_size if mode == "size" else empirical_power
    result = run(test_id, spec, replications, alpha, config.seed, config.workers,
                 config.rals_replications)
    os.makedirs(config.out_dir, exist_ok=True)
    stem = "simulate_" + re.sub(r"[^A-Za-z0-9_.-]", "_", test_id) + f"_{mode}"
    if "json" in config.formats:
        write_atomic(os.path.join(config.out_dir, stem + ".json"), result.to_json())
    if "csv" in config.formats:
        write_atomic(os.path.join(config.out_dir, stem + ".csv"), result.to_csv())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="epochscan", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="run the full pipeline on price CSV files")
    a.add_argument("files", nargs="+")
    a.add_argument("--window", type=int, default=28)
    a.add_argument("--c", type=float, default=0.4)
    a.add_argument("--alpha", type=float, default=0.05)
    a.add_argument("--max-ar", type=int, default=10)
    a.add_argument("--lags", type=_lags, default=(5, 15, 20))
    a.add_argument("--bds-full-grid", action="store_true")
    a.add_argument("--out", default=None)
    a.add_argument("--format", type=partial(_formats, allowed={"json", "csv", "svg"}),
                   default=frozenset({"json", "csv", "svg"}))
    a.add_argument("--date-style", choices=("iso", "us"), default="iso")
    a.add_argument("--seed", type=int, default=DEFAULT_RALS_SEED,
                   help="seed for the RALS critical-value simulation")
    a.add_argument("--rals-reps", type=int, default=DEFAULT_RALS_REPLICATIONS)
    a.add_argument("--workers", type=int, default=1)

    s = sub.add_parser("simulate", help="Monte Carlo size or power of one test")
    s.add_argument("--process", required=True, help="ProcessSpec JSON file")
    s.add_argument("--test", required=True, dest="test_id")
    s.add_argument("--mode", choices=("size", "power"), required=True)
    s.add_argument("--reps", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--alpha", type=float, default=0.05)
    s.add_argument("--out", default=None)
    s.add_argument("--format", type=partial(_formats, allowed={"json", "csv"}),
                   default=frozenset({"json"}))
    s.add_argument("--rals-reps", type=int, default=10000)
    s.add_argument("--workers", type=int, default=1)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "analyze":
            config = RunConfig(
                inputs=tuple(args.files),
                window=WindowSpec(args.window, args.c, args.alpha),
                p_max=args.max_ar,
                battery=BatteryConfig(lags=args.lags, alpha=args.alpha,
                                      bds_full_grid=args.bds_full_grid),
                out_dir=_out_dir(args.out),
                formats=args.format,
                seed=args.seed,
                date_style=args.date_style,
                workers=args.workers,
                rals_replications=args.rals_reps,
            )
            return cmd_analyze(config)
        with open(args.process, encoding="utf-8") as fh:
            spec = ProcessSpec.from_json(fh.read())
        config = RunConfig(out_dir=_out_dir(args.out), formats=args.format, seed=args.seed,
                           workers=args.workers, rals_replications=args.rals_reps)
        return cmd_simulate(config, spec, args.mode, args.test_id, args.reps, args.alpha)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        _error(f"{type(exc).__name__}: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
