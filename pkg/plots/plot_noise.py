#!/usr/bin/env python3
"""Acceptable-noise-vs-on/off-ratio curves from a hardware report CSV.

Consumes the flat CSV written by `rpusim hwcalc --csv ...`, picking rows named
noise_curve.t<T>ns.beta<B>, one curve per integration time.

Usage:
    python plot_noise.py OUT.svg HWREPORT.csv
"""

from __future__ import annotations

import argparse
import csv
import re
from collections import defaultdict

import matplotlib.pyplot as plt

from plot_common import EmptyInputError, save_svg

ROW_RE = re.compile(r"noise_curve\.t(?P<t>[0-9.]+)ns\.beta(?P<b>[0-9.]+)")


def read_noise_curves(path):
    curves = defaultdict(list)
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise EmptyInputError(f"{path}: empty report file")
        for rec in reader:
            m = ROW_RE.fullmatch(rec.get("quantity", ""))
            if m:
                curves[float(m.group("t"))].append(
                    (float(m.group("b")), float(rec["value"])))
    if not curves:
        raise EmptyInputError(f"{path}: no noise_curve rows found")
    return {t: sorted(pts) for t, pts in sorted(curves.items())}


def plot_noise(report_csv, out):
    curves = read_noise_curves(report_csv)
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for t, pts in curves.items():
        betas = [b for b, _ in pts]
        noise = [v for _, v in pts]
        ax.plot(betas, noise, marker="o", markersize=3,
                label=f"t_meas = {t:g} ns")
    ax.set_xscale("log")
    ax.set_xlabel("conductance on/off ratio")
    ax.set_ylabel("acceptable input noise (nV/rtHz)")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    save_svg(fig, out)
    return curves


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out")
    ap.add_argument("report_csv")
    args = ap.parse_args(argv)
    curves = plot_noise(args.report_csv, args.out)
    for t, pts in curves.items():
        print(f"t = {t:g} ns: {len(pts)} points, "
              f"max {max(v for _, v in pts):.1f} nV/rtHz")
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
