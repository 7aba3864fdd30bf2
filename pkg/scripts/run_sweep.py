#!/usr/bin/env python3
"""Run the four-scheme per-beam throughput comparison and print the table.

A thinner front end than the `simulate` CLI, meant for quick experiments:

    python scripts/run_sweep.py --trials 50 --out sweep.csv

The exported <out>.dat companion holds one power column and one throughput
column per scheme, ready for gnuplot:

    plot for [i=2:5] 'sweep.dat' using 1:i with linespoints
"""

import argparse
import sys
import time

from satcoop.harness import SimConfig, export_report, run_sweep


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=50)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--out", default="sweep.csv")
    args = parser.parse_args(argv)

    config = SimConfig(trials=args.trials, master_seed=args.seed,
                       workers=args.workers, out_path=args.out)
    start = time.perf_counter()
    report = run_sweep(config)
    elapsed = time.perf_counter() - start
    export_report(report, config.out_path, "csv")

    print(f"{config.trials} paired trials in {elapsed:.1f}s -> {config.out_path}")
    print(f"{'P_beam dBW':>10} " + " ".join(f"{s:>12}" for s in report.schemes))
    for pi, dbw in enumerate(report.power_grid_dbw):
        row = " ".join(f"{report.mean_mbps[si, pi]:9.1f}±{report.stderr_mbps[si, pi]:<4.1f}"
                       for si in range(len(report.schemes)))
        print(f"{dbw:>10.1f} {row}")
    print("\nmean-throughput gain over the 4-colour baseline at each power:")
    for other in report.schemes:
        if other == "coloring":
            continue
        gains = report.relative_gain[(other, "coloring")]
        print(f"  {other:>8}: " + " ".join(f"{100 * g:+6.1f}%" for g in gains))
    return 0


if __name__ == "__main__":
    sys.exit(main())
