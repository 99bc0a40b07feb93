import csv
import subprocess
import sys
from pathlib import Path

import pytest

PLOTS = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(PLOTS))

from plot_common import EmptyInputError, MissingColumnsError  # noqa: E402
from plot_curves import build_series, plot_curves  # noqa: E402
from plot_noise import plot_noise, read_noise_curves  # noqa: E402
from plot_radar import plot_radar, read_thresholds  # noqa: E402

THRESHOLDS = PLOTS / "radar_thresholds.csv"
HEADER = "experiment,seed,epoch,test_error_percent,saturation_fraction,wallclock"


def write_results(path, rows):
    with open(path, "w") as f:
        f.write(HEADER + "\n")
        for r in rows:
            f.write(",".join(str(x) for x in r) + "\n")


@pytest.fixture
def baseline_csv(tmp_path):
    p = tmp_path / "base.csv"
    rows = []
    for seed in (1, 2):
        errs = {0: 90.0, 1: 8.0 + 0.2 * seed, 2: 4.0 + 0.1 * seed,
                3: 2.0 + 0.1 * seed}
        for e, v in errs.items():
            rows.append(("fig2a.baseline", seed, e, f"{v:.4f}", "0.0", "1.0"))
    write_results(p, rows)
    return p


class TestCurves:
    def test_final_point_equals_csv_value(self, baseline_csv, tmp_path):
        out = tmp_path / "curves.svg"
        series = plot_curves([baseline_csv], out)
        assert out.exists()
        epochs, mean, lo, hi = series["fig2a.baseline"]
        # seed finals are 2.1 and 2.2; the plotted final point is their mean
        assert epochs[-1] == 3
        assert mean[-1] == (2.1 + 2.2) / 2
        assert (lo[-1], hi[-1]) == (2.1, 2.2)

    def test_empty_csv_is_an_explicit_error(self, tmp_path):
        p = tmp_path / "empty.csv"
        p.write_text("")
        with pytest.raises(EmptyInputError):
            plot_curves([p], tmp_path / "x.svg")
        p.write_text(HEADER + "\n")
        with pytest.raises(EmptyInputError):
            plot_curves([p], tmp_path / "x.svg")

    def test_missing_columns_error(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("experiment,epoch\nfoo,1\n")
        with pytest.raises(MissingColumnsError):
            plot_curves([p], tmp_path / "x.svg")

    def test_two_seeds_one_mean_curve_with_band(self, baseline_csv):
        rows = []
        with open(baseline_csv) as f:
            for rec in csv.DictReader(f):
                rows.append({"experiment": rec["experiment"],
                             "seed": int(rec["seed"]),
                             "epoch": int(rec["epoch"]),
                             "error": float(rec["test_error_percent"])})
        series = build_series(rows)
        assert len(series) == 1
        _, mean, lo, hi = series["fig2a.baseline"]
        assert all(l <= m <= h for l, m, h in zip(lo, mean, hi))

    def test_deterministic_output(self, baseline_csv, tmp_path):
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        plot_curves([baseline_csv], a)
        plot_curves([baseline_csv], b)
        assert a.read_bytes() == b.read_bytes()


class TestRadar:
    def test_paper_thresholds_render(self, tmp_path):
        out = tmp_path / "radar.svg"
        names, thresh, inner = plot_radar(THRESHOLDS, out)
        assert out.exists()
        assert names == ["C", "D", "E", "F", "G", "H", "I"]
        assert thresh == [150, 110, 80, 5, 5, 6, 10]
        # the co-optimized polygon (zeros floored to the radial minimum)
        assert inner == [30, 30, 30, 1.0, 1.0, 2, 5]

    def test_degenerate_input_rejected(self, tmp_path):
        p = tmp_path / "one.csv"
        p.write_text("axis,label,threshold_percent,model3_percent\nC,x,150,30\n")
        with pytest.raises(ValueError):
            plot_radar(p, tmp_path / "x.svg")

    def test_missing_columns(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("axis,threshold_percent\nC,150\n")
        with pytest.raises(MissingColumnsError):
            read_thresholds(p)


class TestNoiseCurves:
    @pytest.fixture
    def report_csv(self, tmp_path):
        p = tmp_path / "hw.csv"
        with open(p, "w") as f:
            f.write("quantity,value,unit\n")
            f.write("throughput,419,TeraOps/s\n")
            for t in (20, 80):
                for b, v in ((2, 5.0 + t / 20), (6, 10.0 + t / 20),
                             (100, 14.0 + t / 20)):
                    f.write(f"noise_curve.t{t}ns.beta{b},{v},nV/rtHz\n")
        return p

    def test_curves_extracted_per_integration_time(self, report_csv, tmp_path):
        out = tmp_path / "noise.svg"
        curves = plot_noise(report_csv, out)
        assert out.exists()
        assert sorted(curves) == [20.0, 80.0]
        assert [b for b, _ in curves[20.0]] == [2, 6, 100]

    def test_no_rows_error(self, tmp_path):
        p = tmp_path / "none.csv"
        p.write_text("quantity,value,unit\nthroughput,419,TeraOps/s\n")
        with pytest.raises(EmptyInputError):
            read_noise_curves(p)


class TestCommandLine:
    def test_scripts_run_standalone(self, baseline_csv, tmp_path):
        env_out = tmp_path / "cli.svg"
        r = subprocess.run(
            [sys.executable, str(PLOTS / "plot_curves.py"), str(env_out),
             str(baseline_csv)], capture_output=True, text=True)
        assert r.returncode == 0, r.stderr
        assert env_out.exists()
        assert "final" in r.stdout

        radar_out = tmp_path / "cli_radar.svg"
        r = subprocess.run(
            [sys.executable, str(PLOTS / "plot_radar.py"), str(radar_out),
             str(THRESHOLDS)], capture_output=True, text=True)
        assert r.returncode == 0, r.stderr
        assert radar_out.exists()
