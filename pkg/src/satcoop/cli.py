"""Command-line front end for the power sweep.

Usage:
    simulate --trials 200 --seed 1 --schemes coloring,rzf,csi,csidata \
             --power-dbw 0:30:5 --m 1 --out results.csv --format csv

Flags may also come from a flat key=value config file (--config); explicit
flags override file values.  Exit codes: 0 success, 1 configuration error,
2 I/O error.  The SATCOOP_WORKERS environment variable sets the worker
count when neither the flag nor the file provides one.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .harness import (SCHEME_NAMES, WORKERS_ENV_VAR, SimConfig, export_report,
                      run_sweep)

_CONFIG_KEYS = ("trials", "seed", "schemes", "power_dbw", "m", "out", "format",
                "paper_literal_coloring", "workers")


def parse_power_grid(text: str) -> tuple[float, ...]:
    """Accept 'start:stop:step' (inclusive) or a comma list of dBW values."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"power grid {text!r} is not start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ValueError(f"power grid {text!r} must ascend with step > 0")
        grid = []
        value = start
        while value <= stop + 1e-9:
            grid.append(round(value, 9))
            value += step
        return tuple(grid)
    return tuple(float(p) for p in text.split(","))


def parse_schemes(text: str) -> tuple[str, ...]:
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    for name in names:
        if name not in SCHEME_NAMES:
            raise ValueError(f"unknown scheme {name!r}; valid: "
                             + ",".join(SCHEME_NAMES))
    return names


def load_config_file(path: str) -> dict:
    """Flat key=value file mirroring the CLI flags; '#' starts a comment."""
    values: dict = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, _, val = line.partition("=")
            key = key.strip()
            if key not in _CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = val.strip()
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simulate",
        description="Monte-Carlo per-beam throughput sweep comparing "
                    "multibeam transmission strategies.")
    parser.add_argument("--config", metavar="FILE",
                        help="key=value config file; flags override it")
    parser.add_argument("--trials", type=int,
                        help="number of Monte-Carlo trials (default 200)")
    parser.add_argument("--seed", type=int,
                        help="master seed for the trial ladder (default 1)")
    parser.add_argument("--schemes",
                        help="comma list among: " + ",".join(SCHEME_NAMES)
                        + " (default all)")
    parser.add_argument("--power-dbw",
                        help="per-beam power grid, start:stop:step or comma "
                             "list in dBW (default 0:30:5)")
    parser.add_argument("--m", type=int, dest="m",
                        help="edge users selected per neighbouring cluster "
                             "(default 1)")
    parser.add_argument("--out",
                        help="output file path (default results.csv)")
    parser.add_argument("--format", choices=("csv", "json"),
                        help="output format (default csv)")
    parser.add_argument("--paper-literal-coloring", action="store_true",
                        default=None,
                        help="use the 4*W*N0 noise constant in the coloring "
                             "SINR instead of the W/4 sub-band noise")
    parser.add_argument("--workers", type=int,
                        help="parallel trial workers (default: "
                             f"${WORKERS_ENV_VAR} or CPU count)")
    return parser


def _merge_config(args: argparse.Namespace) -> SimConfig:
    file_values = load_config_file(args.config) if args.config else {}

    def pick(flag_value, key, convert):
        if flag_value is not None:
            return flag_value
        if key in file_values:
            return convert(file_values[key])
        return None

    overrides = {}
    trials = pick(args.trials, "trials", int)
    if trials is not None:
        overrides["trials"] = trials
    seed = pick(args.seed, "seed", int)
    if seed is not None:
        overrides["master_seed"] = seed
    schemes = pick(parse_schemes(args.schemes) if args.schemes else None,
                   "schemes", parse_schemes)
    if schemes is not None:
        overrides["schemes"] = schemes
    grid = pick(parse_power_grid(args.power_dbw) if args.power_dbw else None,
                "power_dbw", parse_power_grid)
    if grid is not None:
        overrides["power_grid_dbw_per_beam"] = grid
    m = pick(args.m, "m", int)
    if m is not None:
        overrides["m_per_neighbour"] = m
    out = pick(args.out, "out", str)
    if out is not None:
        overrides["out_path"] = out
    fmt = pick(args.format, "format", str)
    if fmt is not None:
        overrides["out_format"] = fmt
    literal = pick(args.paper_literal_coloring, "paper_literal_coloring",
                   lambda v: v.lower() in ("1", "true", "yes"))
    if literal is not None:
        overrides["paper_literal_coloring"] = literal
    workers = pick(args.workers, "workers", int)
    if workers is not None:
        overrides["workers"] = workers

    config = dataclasses.replace(SimConfig(), **overrides)
    config.validate()
    return config


def _glue_negative_values(argv: list) -> list:
    """Join `--power-dbw -15:15:5` into one token so argparse does not
    mistake the leading-dash value for an option."""
    out = []
    tokens = iter(argv)
    for token in tokens:
        if token == "--power-dbw":
            value = next(tokens, None)
            out.append(token if value is None else f"{token}={value}")
        else:
            out.append(token)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    try:
        args = parser.parse_args(_glue_negative_values(list(argv)))
    except SystemExit as exc:
        # argparse exits 2 on usage errors; that is a configuration error
        # here, and exit code 2 is reserved for I/O failures
        return 0 if not exc.code else 1
    try:
        config = _merge_config(args)
    except (ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1

    try:
        report = run_sweep(config)
        export_report(report, config.out_path, config.out_format)
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2

    print(f"wrote {config.out_path} ({config.trials} trials, "
          f"{len(config.power_grid_dbw_per_beam)} power points)")
    header = "power_dbw " + " ".join(f"{s:>12}" for s in report.schemes)
    print(header)
    for pi, dbw in enumerate(report.power_grid_dbw):
        cells = " ".join(f"{report.mean_mbps[si, pi]:12.3f}"
                         for si in range(len(report.schemes)))
        print(f"{dbw:9.1f} {cells}")
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
