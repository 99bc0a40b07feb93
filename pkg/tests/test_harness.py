import time
from pathlib import Path

import pytest

from rpusim import harness, mnist
from rpusim.catalog import ExperimentSpec
from rpusim.harness import (CSV_COLUMNS, PenaltyReport, ResultLog, ResultRow,
                            SeedMismatchError, apply_budget, penalty_report,
                            run_experiment)

from conftest import DATA_DIR, requires_data


@pytest.fixture(scope="module")
def tiny_spec():
    """A seconds-scale experiment over the synthetic dataset."""
    return ExperimentSpec(name="tiny.stoch", mode="stochastic",
                          lr_rule="dwmin-follows-eta", epochs=2,
                          schedule=((0, 2, 0.05),), seeds=(1, 2),
                          layer_sizes=(784, 16, 8, 10), samples_per_epoch=0)


@pytest.fixture(scope="module")
def tiny_results(tiny_spec, idx_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("results")
    log = run_experiment(tiny_spec, out, idx_dir)
    return out, log


def rows_without_wallclock(path):
    lines = Path(path).read_text().splitlines()
    return [",".join(line.split(",")[:-1]) for line in lines]


class TestRunExperiment:
    def test_csv_layout(self, tiny_spec, tiny_results):
        out, log = tiny_results
        csv_path = out / "tiny.stoch.csv"
        assert csv_path.exists()
        lines = csv_path.read_text().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        # one row per (seed, epoch 0..E)
        assert len(lines) == 1 + len(tiny_spec.seeds) * (tiny_spec.epochs + 1)

    def test_shards_written_incrementally(self, tiny_results):
        out, _ = tiny_results
        shards = sorted(p.name for p in (out / "shards").glob("*.csv"))
        assert shards == ["tiny.stoch_s1.csv", "tiny.stoch_s2.csv"]

    def test_rows_sorted_and_parse_back(self, tiny_results):
        out, log = tiny_results
        back = ResultLog.read_csv(out / "tiny.stoch.csv")
        keys = [(r.seed, r.epoch) for r in back.rows]
        assert keys == sorted(keys)
        assert back.seeds() == [1, 2]
        assert back.final_epoch() == 2

    def test_rerun_is_byte_identical_except_wallclock(self, tiny_spec, idx_dir,
                                                      tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        run_experiment(tiny_spec, a, idx_dir)
        run_experiment(tiny_spec, b, idx_dir, threads=2)
        assert rows_without_wallclock(a / "tiny.stoch.csv") == \
            rows_without_wallclock(b / "tiny.stoch.csv")


class TestPenaltyReport:
    def make_log(self, name, finals, epochs=30):
        log = ResultLog()
        for seed, err in finals.items():
            for e in (0, epochs):
                log.append(ResultRow(name, seed, e, err if e else 90.0, 0.0, 1.0))
        return log

    def test_identical_logs_zero_penalty(self):
        a = self.make_log("x", {1: 2.0, 2: 2.2})
        rep = penalty_report(a, a)
        assert rep.penalty == 0.0

    def test_constructed_difference(self):
        a = self.make_log("x", {1: 2.3})
        b = self.make_log("base", {1: 2.0})
        assert penalty_report(a, b).penalty == pytest.approx(0.3)

    def test_seed_mismatch_raises(self):
        a = self.make_log("x", {1: 2.0})
        b = self.make_log("base", {1: 2.0, 2: 2.0})
        with pytest.raises(SeedMismatchError):
            penalty_report(a, b)

    def test_epoch_mismatch_raises(self):
        a = self.make_log("x", {1: 2.0}, epochs=10)
        b = self.make_log("base", {1: 2.0}, epochs=30)
        with pytest.raises(SeedMismatchError):
            penalty_report(a, b)

    def test_per_seed_matching(self):
        a = self.make_log("x", {1: 3.0, 2: 2.0})
        b = self.make_log("base", {1: 2.0, 2: 2.5})
        rep = penalty_report(a, b)
        assert rep.per_seed == {1: pytest.approx(1.0), 2: pytest.approx(-0.5)}
        assert rep.penalty == pytest.approx(0.25)


class TestResultLog:
    def test_header_enforced(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError):
            ResultLog.read_csv(p)

    def test_empty_file_rejected(self, tmp_path):
        p = tmp_path / "empty.csv"
        p.write_text("")
        with pytest.raises(ValueError):
            ResultLog.read_csv(p)


@requires_data
class TestSmokeBudgetOnRealData:
    def test_every_catalog_entry_has_a_fast_smoke_run(self):
        # spot-check the heaviest entry: one smoke run must stay under 60 s
        from rpusim.catalog import find
        spec = apply_budget(find("fig4b.model1"), "smoke")
        spec.seeds = (1,)
        t0 = time.time()
        log = harness.run_single(spec, 1, DATA_DIR)
        assert time.time() - t0 < 60.0
        assert log.final_epoch() == 1
