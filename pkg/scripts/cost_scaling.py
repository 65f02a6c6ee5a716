"""Measured search cost against the c*l*k*n*d model while n and K grow.

Synthetic Gaussian blobs; each row reports mean objective evaluations,
simplex loops, measured point-to-centroid distance computations and the
model's prediction.

    python scripts/cost_scaling.py
"""

import argparse
import tempfile
from pathlib import Path

import numpy as np

from idskmeans.bench import ExperimentConfig, cost_counters, run_experiment


def write_blobs(path, n, k, d, seed):
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-10, 10, size=(k, d))
    labels = rng.integers(0, k, n)
    pts = centers[labels] + rng.normal(size=(n, d))
    with open(path, "w") as fh:
        for p, l in zip(pts, labels):
            fh.write(",".join(repr(float(v)) for v in p) + f",c{l}\n")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="250,500,1000,2000")
    parser.add_argument("--ks", default="2,4,8")
    parser.add_argument("--dim", type=int, default=3)
    parser.add_argument("--seeds", type=int, default=5)
    parser.add_argument("--max-evals", type=int, default=500)
    parser.add_argument("--depth", type=int, default=3)
    args = parser.parse_args()

    print("| n | K | evaluations | simplex loops | measured distances | predicted c*l*k*n*d | ratio |")
    print("|---|---|---|---|---|---|---|")
    with tempfile.TemporaryDirectory() as tmp:
        for k in map(int, args.ks.split(",")):
            for n in map(int, args.sizes.split(",")):
                path = Path(tmp) / f"blobs-{n}-{k}.csv"
                write_blobs(path, n, k, args.dim, seed=n * 31 + k)
                cfg = ExperimentConfig(dataset=str(path), schema=f"label={args.dim}", algo="ids-kmeans", k=k,
                                       seeds=list(range(args.seeds)), max_evals=args.max_evals,
                                       depth=args.depth, traces=False, timing=False)
                cost = cost_counters(run_experiment(cfg))
                ratio = cost.measured_distance_computations / cost.predicted_operations
                print(f"| {n} | {k} | {cost.evaluations:.0f} | {cost.simplex_loops:.1f} | "
                      f"{cost.measured_distance_computations:.3g} | {cost.predicted_operations:.3g} | {ratio:.3f} |")


if __name__ == "__main__":
    main()
