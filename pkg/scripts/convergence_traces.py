"""Per-iteration Dunn and Jagota traces of the final k-means phase, k-means vs ids-kmeans.

Writes one CSV per (dataset, algorithm, seed) plus a median-over-seeds summary
with columns iteration, kmeans_dunn, ids_dunn, kmeans_jagota, ids_jagota.
Runs that stop early carry their final value forward.

    python scripts/convergence_traces.py --out-dir results/traces
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from idskmeans.bench import ExperimentConfig, emit, run_experiment


def padded(report, column, length):
    rows = []
    for record in report.records:
        values = [row[column] for row in record.trace]
        rows.append(values + [values[-1]] * (length - len(values)))
    return np.median(np.array(rows, dtype=float), axis=0)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--datasets", default="iris,wine")
    parser.add_argument("--seeds", type=int, default=30)
    parser.add_argument("--out-dir", type=Path, default=Path("results/traces"))
    args = parser.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    for name in args.datasets.split(","):
        reports = {}
        for algo in ("kmeans", "ids-kmeans"):
            cfg = ExperimentConfig(dataset=name, algo=algo, seeds=list(range(args.seeds)), timing=False)
            reports[algo] = run_experiment(cfg)
            emit(reports[algo], "csv", args.out_dir / f"{name}-{algo}.csv", traces=True)
        length = max(len(r.trace) for rep in reports.values() for r in rep.records)
        summary = args.out_dir / f"{name}-median-trace.csv"
        with open(summary, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["final_lloyd_iteration", "kmeans_dunn", "ids_dunn", "kmeans_jagota", "ids_jagota"])
            cols = [padded(reports["kmeans"], 2, length), padded(reports["ids-kmeans"], 2, length),
                    padded(reports["kmeans"], 3, length), padded(reports["ids-kmeans"], 3, length)]
            for i in range(length):
                writer.writerow([i] + [f"{c[i]:.8g}" for c in cols])
        print(f"wrote {summary}")


if __name__ == "__main__":
    main()
