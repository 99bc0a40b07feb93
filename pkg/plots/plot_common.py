"""Shared bits for the figure scripts: deterministic SVG output and strict
CSV ingestion of the harness result schema."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# reproducible SVG: fixed hash salt, no timestamps
matplotlib.rcParams["svg.hashsalt"] = "rpusim-plots"

RESULT_COLUMNS = ("experiment", "seed", "epoch", "test_error_percent",
                  "saturation_fraction", "wallclock")


class EmptyInputError(ValueError):
    pass


class MissingColumnsError(ValueError):
    pass


def read_result_rows(paths):
    """Rows from one or more harness CSVs; schema enforced, order kept."""
    rows = []
    for path in paths:
        with open(path, newline="") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames is None:
                raise EmptyInputError(f"{path}: empty result file")
            missing = set(RESULT_COLUMNS) - set(reader.fieldnames)
            if missing:
                raise MissingColumnsError(
                    f"{path}: missing columns {sorted(missing)}")
            got = False
            for rec in reader:
                got = True
                rows.append({
                    "experiment": rec["experiment"],
                    "seed": int(rec["seed"]),
                    "epoch": int(rec["epoch"]),
                    "error": float(rec["test_error_percent"]),
                })
            if not got:
                raise EmptyInputError(f"{path}: no data rows")
    return rows


def save_svg(fig, out):
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, format=out.suffix.lstrip(".") or "svg",
                metadata={"Date": None} if out.suffix == ".svg" else None)
    plt.close(fig)
