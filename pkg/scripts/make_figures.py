#!/usr/bin/env python3
"""Regenerate every figure from the experiment logs and the design report.

Usage:
    python scripts/make_figures.py [--results results/acceptance] [--out figures]
"""

import argparse
import csv
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

FAMILIES = {
    "fig2a_stream_length": ["fig2a.baseline", "fig2a.bl1", "fig2a.bl2",
                            "fig2a.bl10"],
    "fig2b_nonlinearity": ["fig2a.baseline", "fig2b.k0.5", "fig2b.k0.4",
                           "fig2b.k0.1"],
    "fig3_thresholds": ["fig2a.baseline", "fig3a.line3", "fig3b.bound0.3",
                        "fig4a.c", "fig4a.d", "fig4a.e", "fig4a.f", "fig4a.h",
                        "fig4a.i"],
    "fig4b_combined": ["fig2a.baseline", "fig4b.model1", "fig4b.model3"],
    "fig5b_input_bounds": ["fig2a.baseline", "fig5b.curve1", "fig5b.curve2",
                           "fig5b.curve3"],
}


def run(cmd):
    print("+", " ".join(str(c) for c in cmd))
    subprocess.run([str(c) for c in cmd], check=True)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--results", default="results/acceptance")
    ap.add_argument("--out", default="figures")
    args = ap.parse_args()
    results = Path(args.results)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    for name, experiments in FAMILIES.items():
        csvs = [results / f"{e}.csv" for e in experiments]
        present = [c for c in csvs if c.exists()]
        if len(present) < 2:
            print(f"skip {name}: logs not found")
            continue
        run([sys.executable, ROOT / "plots" / "plot_curves.py",
             out / f"{name}.svg", *present, "--log-y", "--title",
             name.replace("_", " ")])

    run([sys.executable, ROOT / "plots" / "plot_radar.py",
         out / "fig4a_radar.svg", ROOT / "plots" / "radar_thresholds.csv"])

    hw_csv = out / "hw_report.csv"
    from rpusim import hwcalc
    derived = hwcalc.derive(hwcalc.HwParams())
    with open(hw_csv, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(("quantity", "value", "unit"))
        for key, value, unit in hwcalc.report_csv_rows(derived):
            w.writerow((key, f"{value:.6g}", unit))
    run([sys.executable, ROOT / "plots" / "plot_noise.py",
         out / "fig5d_noise.svg", hw_csv])
    print(f"figures in {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
