"""Seeded Monte-Carlo driver: power sweep, aggregation and report export.

Every trial derives its seed from (master_seed, trial_index) alone, so
results are bitwise reproducible regardless of worker count, and extending
the trial count leaves earlier trials unchanged.  All schemes in a trial
consume the identical channel realization (paired design).
"""

from __future__ import annotations

import csv
import json
import math
import multiprocessing
import os
from dataclasses import dataclass

import numpy as np

from .channel import LinkBudget, synthesize_channels
from .geometry import (Topology, build_topology, drop_users,
                       footprint_matched_diameter)
from .schemes import SchemeConfig, run_scheme

SCHEME_NAMES = {
    "coloring": "Coloring4",
    "rzf": "ClusterRZF",
    "csi": "HyperClusterCSI",
    "csidata": "HyperClusterCSIData",
}

WORKERS_ENV_VAR = "SATCOOP_WORKERS"

CSV_FIELDS = ("scheme", "per_beam_power_dbw", "mean_throughput_mbps",
              "std_error_mbps", "trials")


@dataclass(frozen=True)
class SimConfig:
    """Sweep configuration.

    The default power grid spans -15..15 dBW per beam (37..67 dBW EIRP with
    the 52 dBi feed gain), bracketing deployed multibeam operating points;
    the default coverage diameter inscribes each hex cell in its beam's
    -3 dB footprint so the layout is consistent with the antenna model.
    """

    trials: int = 200
    master_seed: int = 1
    power_grid_dbw_per_beam: tuple = (-15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0)
    schemes: tuple = ("coloring", "rzf", "csi", "csidata")
    m_per_neighbour: int = 1
    solver_tol: float = 1e-6
    solver_max_iters: int = 500
    out_path: str = "results.csv"
    out_format: str = "csv"
    paper_literal_coloring: bool = False
    workers: int | None = None
    coverage_diameter_km: float = footprint_matched_diameter()
    clusters: int = 19
    beams_per_cluster: int = 7

    def validate(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.power_grid_dbw_per_beam:
            raise ValueError("power grid must be nonempty")
        if not all(math.isfinite(p) for p in self.power_grid_dbw_per_beam):
            raise ValueError("power grid entries must be finite")
        if not self.schemes:
            raise ValueError("at least one scheme must be selected")
        for name in self.schemes:
            if name not in SCHEME_NAMES:
                raise ValueError(f"unknown scheme {name!r}; valid: "
                                 + ",".join(SCHEME_NAMES))
        if self.out_format not in ("csv", "json"):
            raise ValueError(f"unknown output format {self.out_format!r}")
        if self.workers is not None and self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.m_per_neighbour < 0:
            raise ValueError("m_per_neighbour must be nonnegative")


@dataclass
class SweepReport:
    """Aggregated sweep outcome: (scheme, power) cells over paired trials."""

    schemes: tuple
    power_grid_dbw: tuple
    trials: int
    mean_mbps: np.ndarray            # (S, P)
    stderr_mbps: np.ndarray          # (S, P)
    trial_mbps: np.ndarray | None    # (S, P, T) per-trial mean-per-beam values
    relative_gain: dict              # (a, b) -> (P,) array, mean_a/mean_b - 1
    checksums: tuple = ()            # per-trial realization checksums
    nonconverged: np.ndarray | None = None   # (S, P) solver flags tripped


def _scheme_config(name: str, config: SimConfig, p_total: float) -> SchemeConfig:
    return SchemeConfig(
        kind=SCHEME_NAMES[name],
        p_total_per_gw=p_total,
        m_per_neighbour=config.m_per_neighbour,
        paper_literal_coloring=config.paper_literal_coloring,
        solver_tol=config.solver_tol,
        solver_max_iters=config.solver_max_iters,
    )


def run_trial(topology: Topology, budget: LinkBudget, config: SimConfig,
              trial: int):
    """One seeded trial: a drop, a realization, all schemes at all powers.

    Returns (means (S, P) in Mbps, checksum, nonconverged counts (S, P)).
    """
    seed = np.random.SeedSequence([config.master_seed, trial])
    drop_seq, chan_seq = seed.spawn(2)
    drop = drop_users(topology, np.random.default_rng(drop_seq))
    realization = synthesize_channels(topology, drop, budget,
                                      np.random.default_rng(chan_seq))

    checksum = realization.checksum()
    n_schemes = len(config.schemes)
    n_powers = len(config.power_grid_dbw_per_beam)
    means = np.zeros((n_schemes, n_powers))
    nonconv = np.zeros((n_schemes, n_powers), dtype=int)
    for pi, dbw in enumerate(config.power_grid_dbw_per_beam):
        p_total = config.beams_per_cluster * 10.0 ** (dbw / 10.0)
        for si, name in enumerate(config.schemes):
            result = run_scheme(topology, realization,
                                _scheme_config(name, config, p_total))
            if result.diagnostics["realization_checksum"] != checksum:
                raise RuntimeError(f"trial {trial}: scheme {name} did not "
                                   "consume the paired realization")
            means[si, pi] = result.per_beam_throughput.mean() / 1e6
            flags = result.diagnostics.get("solver_converged")
            if flags is not None:
                nonconv[si, pi] = int(np.sum(~np.asarray(flags)))
    return means, checksum, nonconv


def _trial_star(args):
    return run_trial(*args)


def resolve_workers(requested: int | None) -> int:
    if requested is not None:
        return max(1, requested)
    env = os.environ.get(WORKERS_ENV_VAR)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_sweep(config: SimConfig) -> SweepReport:
    """Run the paired Monte-Carlo sweep described by config."""
    config.validate()
    topology = build_topology(config.coverage_diameter_km,
                              config.beams_per_cluster, config.clusters)
    budget = LinkBudget()

    jobs = [(topology, budget, config, t) for t in range(config.trials)]
    workers = resolve_workers(config.workers)
    if workers > 1 and config.trials > 1:
        with multiprocessing.Pool(min(workers, config.trials)) as pool:
            outcomes = pool.map(_trial_star, jobs)
    else:
        outcomes = [run_trial(*job) for job in jobs]

    trial_values = np.stack([m for m, _, _ in outcomes], axis=-1)  # (S, P, T)
    checksums = tuple(c for _, c, _ in outcomes)
    nonconv = np.sum([n for _, _, n in outcomes], axis=0)

    mean = trial_values.mean(axis=-1)
    if config.trials > 1:
        stderr = trial_values.std(axis=-1, ddof=1) / math.sqrt(config.trials)
    else:
        stderr = np.zeros_like(mean)

    gains = {}
    for ai, a in enumerate(config.schemes):
        for bi, b in enumerate(config.schemes):
            if a != b:
                gains[(a, b)] = mean[ai] / mean[bi] - 1.0

    return SweepReport(
        schemes=tuple(config.schemes),
        power_grid_dbw=tuple(config.power_grid_dbw_per_beam),
        trials=config.trials,
        mean_mbps=mean,
        stderr_mbps=stderr,
        trial_mbps=trial_values,
        relative_gain=gains,
        checksums=checksums,
        nonconverged=nonconv,
    )


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def export_report(report: SweepReport, path: str, fmt: str = "csv") -> None:
    """Write the aggregated report plus a gnuplot-style companion file.

    CSV columns: scheme, per_beam_power_dbw, mean_throughput_mbps,
    std_error_mbps, trials.  JSON mirrors the same fields as a row list.
    The companion <base>.dat holds one x-column of power and one y-column
    of mean throughput per scheme for direct plotting.
    """
    rows = []
    for si, scheme in enumerate(report.schemes):
        for pi, dbw in enumerate(report.power_grid_dbw):
            rows.append({
                "scheme": scheme,
                "per_beam_power_dbw": _fmt(dbw),
                "mean_throughput_mbps": _fmt(report.mean_mbps[si, pi]),
                "std_error_mbps": _fmt(report.stderr_mbps[si, pi]),
                "trials": str(report.trials),
            })

    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
            writer.writeheader()
            writer.writerows(rows)
    elif fmt == "json":
        with open(path, "w") as fh:
            json.dump({"rows": rows}, fh, indent=2)
            fh.write("\n")
    else:
        raise ValueError(f"unknown output format {fmt!r}")

    base, _ = os.path.splitext(path)
    with open(base + ".dat", "w") as fh:
        fh.write("# per_beam_power_dbw " + " ".join(report.schemes) + "\n")
        for pi, dbw in enumerate(report.power_grid_dbw):
            cols = [_fmt(dbw)] + [_fmt(report.mean_mbps[si, pi])
                                  for si in range(len(report.schemes))]
            fh.write(" ".join(cols) + "\n")


def load_report(path: str, fmt: str = "csv") -> SweepReport:
    """Re-parse an exported report (aggregates only, no per-trial data)."""
    if fmt == "csv":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    elif fmt == "json":
        with open(path) as fh:
            rows = json.load(fh)["rows"]
    else:
        raise ValueError(f"unknown output format {fmt!r}")

    schemes, powers = [], []
    for row in rows:
        if row["scheme"] not in schemes:
            schemes.append(row["scheme"])
        dbw = float(row["per_beam_power_dbw"])
        if dbw not in powers:
            powers.append(dbw)
    mean = np.zeros((len(schemes), len(powers)))
    stderr = np.zeros_like(mean)
    trials = 0
    for row in rows:
        si = schemes.index(row["scheme"])
        pi = powers.index(float(row["per_beam_power_dbw"]))
        mean[si, pi] = float(row["mean_throughput_mbps"])
        stderr[si, pi] = float(row["std_error_mbps"])
        trials = int(row["trials"])

    gains = {}
    for ai, a in enumerate(schemes):
        for bi, b in enumerate(schemes):
            if a != b:
                with np.errstate(divide="ignore", invalid="ignore"):
                    gains[(a, b)] = mean[ai] / mean[bi] - 1.0
    return SweepReport(
        schemes=tuple(schemes),
        power_grid_dbw=tuple(powers),
        trials=trials,
        mean_mbps=mean,
        stderr_mbps=stderr,
        trial_mbps=None,
        relative_gain=gains,
    )


def aggregate_mean_stderr(values: np.ndarray) -> tuple[float, float]:
    """Mean and standard error of a 1-D sample (stderr 0 for a single value)."""
    values = np.asarray(values, dtype=float)
    mean = float(values.mean())
    if values.size < 2:
        return mean, 0.0
    return mean, float(values.std(ddof=1) / math.sqrt(values.size))
