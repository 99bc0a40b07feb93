#!/usr/bin/env python3
"""Test-error-vs-epoch chart families from harness result CSVs.

One line per group (default grouping: experiment name), drawn as the mean
over seeds with a shaded min/max band.  Vector output by default.

Usage:
    python plot_curves.py OUT.svg RESULTS.csv [MORE.csv ...]
        [--group-by experiment] [--log-y] [--title TEXT]
"""

from __future__ import annotations

import argparse
from collections import defaultdict

import matplotlib.pyplot as plt

from plot_common import EmptyInputError, read_result_rows, save_svg


def build_series(rows, group_by="experiment"):
    """{group: (epochs, mean, lo, hi)} with seeds aggregated per epoch."""
    if group_by != "experiment":
        raise ValueError("the result schema groups by experiment")
    by_group = defaultdict(lambda: defaultdict(list))
    for r in rows:
        by_group[r["experiment"]][r["epoch"]].append(r["error"])
    series = {}
    for name, per_epoch in sorted(by_group.items()):
        epochs = sorted(per_epoch)
        mean = [sum(per_epoch[e]) / len(per_epoch[e]) for e in epochs]
        lo = [min(per_epoch[e]) for e in epochs]
        hi = [max(per_epoch[e]) for e in epochs]
        series[name] = (epochs, mean, lo, hi)
    return series


def plot_curves(csv_paths, out, group_by="experiment", log_y=False,
                title=None):
    """Render the chart; returns the plotted series for inspection."""
    rows = read_result_rows(csv_paths)
    if not rows:
        raise EmptyInputError("no rows to plot")
    series = build_series(rows, group_by)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for name, (epochs, mean, lo, hi) in series.items():
        line, = ax.plot(epochs, mean, marker="o", markersize=3, label=name)
        if lo != mean or hi != mean:
            ax.fill_between(epochs, lo, hi, alpha=0.18,
                            color=line.get_color(), linewidth=0)
    ax.set_xlabel("epoch")
    ax.set_ylabel("test error (%)")
    if log_y:
        ax.set_yscale("log")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    save_svg(fig, out)
    return series


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out")
    ap.add_argument("csv", nargs="+")
    ap.add_argument("--group-by", default="experiment")
    ap.add_argument("--log-y", action="store_true")
    ap.add_argument("--title")
    args = ap.parse_args(argv)
    series = plot_curves(args.csv, args.out, args.group_by, args.log_y,
                         args.title)
    for name, (epochs, mean, _, _) in series.items():
        print(f"{name}: {len(epochs)} epochs, final {mean[-1]:.2f}%")
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
