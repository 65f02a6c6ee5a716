"""Accuracy, Dunn and Jagota comparisons on Iris, Wine and Glass.

    python scripts/reproduce_tables.py --out results/tables.md
"""

import argparse
from pathlib import Path

from idskmeans.bench import ExperimentConfig, compare, comparison_markdown, run_experiment

ALGOS = ("kmeans", "rs-kmeans", "ds-kmeans", "ids-kmeans")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--datasets", default="iris,wine,glass")
    parser.add_argument("--seeds", type=int, default=30)
    parser.add_argument("--preprocess", default="none", choices=["none", "zscore", "minmax"])
    parser.add_argument("--max-evals", type=int, default=2000)
    parser.add_argument("--out", type=Path)
    args = parser.parse_args()

    sections = [f"Seeds 0..{args.seeds - 1}, preprocess={args.preprocess}, max_evals={args.max_evals}\n"]
    for name in args.datasets.split(","):
        reports = [
            run_experiment(ExperimentConfig(dataset=name, algo=algo, seeds=list(range(args.seeds)),
                                            preprocess=args.preprocess, max_evals=args.max_evals,
                                            traces=False, timing=False))
            for algo in ALGOS
        ]
        sections.append(comparison_markdown(compare(reports)))
        print(sections[-1])
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text("\n".join(sections), encoding="utf-8")


if __name__ == "__main__":
    main()
