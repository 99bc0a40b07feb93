#!/usr/bin/env python3
"""Radar chart of device tolerance thresholds.

Reads a thresholds CSV (columns: axis,label,threshold_percent,model3_percent)
and draws the tolerance polygon on a log radial scale, with the co-optimized
operating point shaded inside.

Usage:
    python plot_radar.py OUT.svg THRESHOLDS.csv
"""

from __future__ import annotations

import argparse
import csv
import math

import matplotlib.pyplot as plt
import numpy as np

from plot_common import EmptyInputError, MissingColumnsError, save_svg

COLUMNS = ("axis", "label", "threshold_percent", "model3_percent")
RADIAL_FLOOR = 1.0  # percent; log scale cannot show zero


def read_thresholds(path):
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise EmptyInputError(f"{path}: empty thresholds file")
        missing = set(COLUMNS) - set(reader.fieldnames)
        if missing:
            raise MissingColumnsError(f"{path}: missing columns {sorted(missing)}")
        rows = [(rec["axis"], rec["label"], float(rec["threshold_percent"]),
                 float(rec["model3_percent"])) for rec in reader]
    if not rows:
        raise EmptyInputError(f"{path}: no data rows")
    if len(rows) < 3:
        raise ValueError(f"{path}: a radar needs at least 3 axes, got {len(rows)}")
    return rows


def plot_radar(thresholds_csv, out):
    """Render; returns (axis labels, threshold radii, inner radii)."""
    rows = read_thresholds(thresholds_csv)
    n = len(rows)
    names = [r[0] for r in rows]
    thresh = [max(r[2], RADIAL_FLOOR) for r in rows]
    inner = [max(r[3], RADIAL_FLOOR) for r in rows]

    angles = [2 * math.pi * i / n for i in range(n)]
    closed = angles + angles[:1]
    log_t = [math.log10(v) for v in thresh] + [math.log10(thresh[0])]
    log_i = [math.log10(v) for v in inner] + [math.log10(inner[0])]

    fig, ax = plt.subplots(figsize=(5.4, 5.4),
                           subplot_kw={"projection": "polar"})
    ax.plot(closed, log_t, color="tab:blue", linewidth=1.8,
            label="tolerance threshold")
    ax.plot(closed, log_i, color="tab:gray", linewidth=1.0)
    ax.fill(closed, log_i, color="tab:gray", alpha=0.35,
            label="co-optimized point")
    ax.set_xticks(angles)
    ax.set_xticklabels(names)
    ticks = [0, 1, 2, 3]
    ax.set_yticks(ticks)
    ax.set_yticklabels([f"{10**t:g}%" for t in ticks], fontsize=7)
    ax.set_ylim(0, 3)
    ax.legend(loc="lower right", bbox_to_anchor=(1.15, -0.1), fontsize=8)
    save_svg(fig, out)
    return names, thresh, inner


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out")
    ap.add_argument("thresholds_csv")
    args = ap.parse_args(argv)
    names, thresh, inner = plot_radar(args.thresholds_csv, args.out)
    print(f"{len(names)} axes: {', '.join(names)}")
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
