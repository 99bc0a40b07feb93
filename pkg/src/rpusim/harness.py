"""Seeded experiment execution and CSV result logs.

One run = (experiment, seed).  Runs write per-seed shard files incrementally
(useful for watching long jobs); the merged per-experiment CSV is assembled
in deterministic (seed, epoch) order so a re-run with the same seeds is
byte-identical except for the wallclock column.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import mnist
from .catalog import ExperimentSpec, find, load_config
from .network import Network
from .streams import TranslatorConfig

CSV_COLUMNS = ("experiment", "seed", "epoch", "test_error_percent",
               "saturation_fraction", "wallclock")


class SeedMismatchError(ValueError):
    pass


@dataclass
class ResultRow:
    experiment: str
    seed: int
    epoch: int
    test_error_percent: float
    saturation_fraction: float
    wallclock: float


class ResultLog:
    """Append-only result rows, one per (seed, epoch)."""

    def __init__(self, rows=None):
        self.rows: list[ResultRow] = list(rows or [])

    def append(self, row: ResultRow) -> None:
        self.rows.append(row)

    def sorted(self) -> "ResultLog":
        return ResultLog(sorted(self.rows, key=lambda r: (r.experiment, r.seed,
                                                          r.epoch)))

    def seeds(self) -> list[int]:
        return sorted({r.seed for r in self.rows})

    def final_epoch(self) -> int:
        return max(r.epoch for r in self.rows)

    def final_errors(self) -> dict[int, float]:
        """Final-epoch test error per seed."""
        last = self.final_epoch()
        return {r.seed: r.test_error_percent for r in self.rows
                if r.epoch == last}

    def mean_final_error(self) -> float:
        errs = self.final_errors()
        return sum(errs.values()) / len(errs)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(CSV_COLUMNS)
            for r in self.rows:
                w.writerow(_format_row(r))

    @staticmethod
    def read_csv(path) -> "ResultLog":
        log = ResultLog()
        with open(path, newline="") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header is None:
                raise ValueError(f"{path}: empty result file")
            if tuple(header) != CSV_COLUMNS:
                raise ValueError(f"{path}: unexpected header {header}")
            for rec in reader:
                log.append(ResultRow(rec[0], int(rec[1]), int(rec[2]),
                                     float(rec[3]), float(rec[4]),
                                     float(rec[5])))
        return log


def _format_row(r: ResultRow):
    return (r.experiment, r.seed, r.epoch, f"{r.test_error_percent:.4f}",
            f"{r.saturation_fraction:.6f}", f"{r.wallclock:.3f}")


def build_network(spec: ExperimentSpec, seed: int) -> Network:
    """Instantiate the network a spec describes, for one seed."""
    return Network(spec.network_config(), spec.array_spec(), spec.readout(),
                   spec.alpha_output, TranslatorConfig(bl=spec.bl),
                   spec.mode, spec.lr_rule, seed,
                   base_eta=spec.schedule[0][2])


def run_single(spec: ExperimentSpec, seed: int, data_dir,
               shard_path=None) -> ResultLog:
    """Train one seed of one experiment, streaming rows to a shard file."""
    train, test = mnist.load_dataset(data_dir, strict_counts=False)
    net = build_network(spec, seed)
    log = ResultLog()
    shard = None
    writer = None
    if shard_path is not None:
        shard = open(shard_path, "w", newline="")
        writer = csv.writer(shard)
        writer.writerow(CSV_COLUMNS)

    def on_epoch(res):
        row = ResultRow(spec.name, seed, res.epoch, res.error_percent,
                        res.saturation_fraction, res.wallclock)
        log.append(row)
        if writer is not None:
            writer.writerow(_format_row(row))
            shard.flush()

    samples = spec.samples_per_epoch or None
    net.train(train.images, train.labels, test.images, test.labels,
              spec.lr_schedule(), spec.epochs, samples_per_epoch=samples,
              on_epoch=on_epoch)
    if shard is not None:
        shard.close()
    return log


def _worker(args):
    spec, seed, data_dir, shard = args
    return run_single(spec, seed, data_dir, shard)


def run_experiment(spec: ExperimentSpec, out_dir, data_dir,
                   threads: int = 1) -> ResultLog:
    """All seeds of one experiment; writes <name>.csv under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    shards = out / "shards"
    shards.mkdir(exist_ok=True)
    tasks = [(spec, seed, data_dir, shards / f"{spec.name}_s{seed}.csv")
             for seed in spec.seeds]
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            logs = list(pool.map(_worker, tasks))
    else:
        logs = [_worker(t) for t in tasks]
    merged = ResultLog([r for log in logs for r in log.rows]).sorted()
    merged.write_csv(out / f"{spec.name}.csv")
    return merged


def resolve_experiment(token: str) -> ExperimentSpec:
    """A catalog name, or a path to a config file."""
    if Path(token).exists():
        return load_config(token)
    return find(token)


@dataclass
class PenaltyReport:
    experiment: str
    baseline: str
    final_epoch: int
    per_seed: dict[int, float]
    mean_error: float
    mean_baseline_error: float

    @property
    def penalty(self) -> float:
        return self.mean_error - self.mean_baseline_error


def penalty_report(log: ResultLog, baseline_log: ResultLog) -> PenaltyReport:
    """Final-epoch error excess over the float baseline, seed-matched."""
    if log.seeds() != baseline_log.seeds():
        raise SeedMismatchError(
            f"seed sets differ: {log.seeds()} vs {baseline_log.seeds()}")
    if log.final_epoch() != baseline_log.final_epoch():
        raise SeedMismatchError(
            f"epoch budgets differ: {log.final_epoch()} vs "
            f"{baseline_log.final_epoch()}")
    errs = log.final_errors()
    base = baseline_log.final_errors()
    per_seed = {s: errs[s] - base[s] for s in errs}
    name = log.rows[0].experiment if log.rows else "?"
    bname = baseline_log.rows[0].experiment if baseline_log.rows else "?"
    return PenaltyReport(name, bname, log.final_epoch(), per_seed,
                         log.mean_final_error(),
                         baseline_log.mean_final_error())


SMOKE = "smoke"
CI = "ci"
FULL = "full"


def apply_budget(spec: ExperimentSpec, budget: str) -> ExperimentSpec:
    """Reduced-budget presets: smoke = 1 epoch over 6k samples, ci = 10
    epochs at a constant 0.01 rate."""
    if budget == FULL:
        return spec
    if budget == SMOKE:
        spec.epochs = 1
        spec.samples_per_epoch = 6000
        return spec
    if budget == CI:
        spec.epochs = 10
        spec.schedule = ((0, 10, 0.01),)
        return spec
    raise ValueError(f"unknown budget {budget!r}")
