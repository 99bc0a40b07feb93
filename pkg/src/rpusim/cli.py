"""Command-line entry point: run experiments, list the catalog, report
penalties, and emit the hardware design report."""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

from . import harness, hwcalc
from .catalog import catalog, to_config_text

DEFAULT_DATA_DIR = os.environ.get("RPUSIM_DATA", "data/mnist")


def _cmd_run(args) -> int:
    spec = harness.resolve_experiment(args.experiment)
    if args.seed:
        spec.seeds = tuple(int(s) for s in args.seed.split(","))
    spec = harness.apply_budget(spec, args.budget)
    if args.epochs is not None:
        spec.epochs = args.epochs
    log = harness.run_experiment(spec, args.out, args.data_dir,
                                 threads=args.threads)
    errs = log.final_errors()
    print(f"{spec.name}: final error "
          + ", ".join(f"seed {s}: {e:.2f}%" for s, e in sorted(errs.items()))
          + f"  (mean {log.mean_final_error():.2f}%)")
    base_csv = Path(args.out) / "fig2a.baseline.csv"
    if spec.name != "fig2a.baseline" and base_csv.exists():
        try:
            rep = harness.penalty_report(log, harness.ResultLog.read_csv(base_csv))
            print(f"penalty vs stored baseline: {rep.penalty:+.2f}%")
        except harness.SeedMismatchError as e:
            print(f"penalty vs stored baseline: n/a ({e})")
    return 0


def _cmd_list(args) -> int:
    for spec in catalog():
        note = f"  # {spec.note}" if spec.note else ""
        print(f"{spec.name:<16} {spec.mode:<10}{note}")
        if args.dump_configs:
            d = Path(args.dump_configs)
            d.mkdir(parents=True, exist_ok=True)
            (d / f"{spec.name}.conf").write_text(to_config_text(spec))
    return 0


def _cmd_report(args) -> int:
    logs = [harness.ResultLog.read_csv(p) for p in args.csv]
    base = None
    if args.baseline:
        base = harness.ResultLog.read_csv(args.baseline)
    for path, log in zip(args.csv, logs):
        name = log.rows[0].experiment if log.rows else path
        line = (f"{name:<16} final {log.mean_final_error():6.2f}% "
                f"(epoch {log.final_epoch()}, seeds {log.seeds()})")
        if base is not None:
            rep = harness.penalty_report(log, base)
            lo = min(rep.per_seed.values())
            hi = max(rep.per_seed.values())
            line += f"  penalty {rep.penalty:+.2f}% (range {lo:+.2f}..{hi:+.2f})"
        print(line)
    return 0


def _cmd_hwcalc(args) -> int:
    params = hwcalc.load_params(args.config) if args.config else hwcalc.HwParams()
    derived = hwcalc.derive(params)
    print(hwcalc.render_report(derived), end="")
    if args.csv:
        with open(args.csv, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(("quantity", "value", "unit"))
            for key, value, unit in hwcalc.report_csv_rows(derived):
                w.writerow((key, f"{value:.6g}", unit))
        print(f"\nwrote {args.csv}")
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="rpusim",
        description="crossbar training simulator and design calculator")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a named or configured experiment")
    p.add_argument("experiment", help="catalog name or config file path")
    p.add_argument("--seed", help="comma-separated seed list override")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--budget", choices=(harness.FULL, harness.SMOKE, harness.CI),
                   default=harness.FULL)
    p.add_argument("--out", default="results")
    p.add_argument("--data-dir", default=DEFAULT_DATA_DIR)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("list", help="list catalog experiments")
    p.add_argument("--dump-configs", metavar="DIR",
                   help="also write one config file per entry")
    p.set_defaults(func=_cmd_list)

    p = sub.add_parser("report", help="summarize result CSVs")
    p.add_argument("csv", nargs="+")
    p.add_argument("--baseline", help="baseline CSV for penalty columns")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("hwcalc", help="hardware design report")
    p.add_argument("config", nargs="?", help="optional HwParams config file")
    p.add_argument("--csv", help="also write a flat CSV of every quantity")
    p.set_defaults(func=_cmd_hwcalc)

    args = ap.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
