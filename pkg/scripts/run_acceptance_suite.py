#!/usr/bin/env python3
"""Run every training experiment the acceptance suite asserts over.

Populates results/acceptance/<name>.csv; test_acceptance.py reads those CSVs.
Resumable: completed per-seed shard files are detected and skipped, so the
script can be re-run after an interruption.

Usage:
    python scripts/run_acceptance_suite.py [--out results/acceptance]
        [--data-dir /root/data/mnist] [--workers 2] [--seeds 1,2,3]
"""

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path

# keep BLAS single-threaded: parallelism lives at the run level
for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(var, "1")

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from rpusim import harness
from rpusim.catalog import find

# ordered longest-first so two workers pack well
EXPERIMENTS = [
    "fig4a.c",        # sigma_c2c at threshold: noise draw per coincidence
    "fig4b.model1",
    "fig4b.model3",
    "fig5b.curve1",
    "fig5b.curve2",
    "fig5b.curve3",
    "fig3c.line2",
    "fig4a.d",
    "fig4a.e",
    "fig4a.f",
    "fig4a.g",
    "fig4a.h",
    "fig4a.i",
    "fig3h.line1",
    "fig3f.line1",
    "fig3a.line3",
    "fig3b.bound0.3",
    "fig2b.k0.5",
    "fig2b.k0.1",
    "fig2a.bl10",
    "fig2a.bl1",
    "fig2a.baseline",
]


def shard_complete(path: Path, epochs: int) -> bool:
    if not path.exists():
        return False
    with open(path) as f:
        return sum(1 for _ in f) == epochs + 2  # header + epochs 0..E


def run_one(name: str, seed: int, data_dir: str, shard: str):
    spec = find(name)
    t0 = time.time()
    harness.run_single(spec, seed, data_dir, shard_path=shard)
    return name, seed, time.time() - t0


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/acceptance")
    ap.add_argument("--data-dir", default=os.environ.get(
        "RPUSIM_DATA", "/root/data/mnist"))
    ap.add_argument("--workers", type=int, default=2)
    ap.add_argument("--seeds", default="1,2,3")
    args = ap.parse_args()

    seeds = tuple(int(s) for s in args.seeds.split(","))
    out = Path(args.out)
    shards = out / "shards"
    shards.mkdir(parents=True, exist_ok=True)

    tasks = []
    for name in EXPERIMENTS:
        spec = find(name)
        for seed in seeds:
            shard = shards / f"{name}_s{seed}.csv"
            if shard_complete(shard, spec.epochs):
                print(f"skip {name} seed {seed} (already complete)")
                continue
            tasks.append((name, seed, args.data_dir, str(shard)))

    print(f"{len(tasks)} runs to execute on {args.workers} workers")
    t_start = time.time()
    with ProcessPoolExecutor(max_workers=args.workers) as pool:
        futs = {pool.submit(run_one, *t): t for t in tasks}
        done = 0
        for fut in as_completed(futs):
            name, seed, dt = fut.result()
            done += 1
            print(f"[{done}/{len(tasks)}] {name} seed {seed}: {dt/60:.1f} min "
                  f"(elapsed {(time.time()-t_start)/60:.0f} min)", flush=True)

    # merge shards into per-experiment CSVs
    for name in EXPERIMENTS:
        spec = find(name)
        rows = []
        for seed in seeds:
            shard = shards / f"{name}_s{seed}.csv"
            rows.extend(harness.ResultLog.read_csv(shard).rows)
        merged = harness.ResultLog(rows).sorted()
        merged.write_csv(out / f"{name}.csv")
        print(f"merged {name}.csv ({len(merged.rows)} rows)")
    print(f"total wall time {(time.time()-t_start)/60:.0f} min")
    return 0


if __name__ == "__main__":
    sys.exit(main())
