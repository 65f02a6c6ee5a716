"""Experiment harness: seeded runs, aggregate reports, comparisons and cost counters."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .dataset import (
    BUILTIN_K,
    BUILTIN_SCHEMAS,
    LabeledDataset,
    load_builtin,
    load_csv,
    parse_schema,
    standardize,
)
from .kmeans import MAX_ITER, kmeans
from .optimizers import DsConfig, RsConfig
from .seeding import SeedingConfig, seeded_kmeans
from .validity import UndefinedIndex, clustering_accuracy, dunn_index, jagota_index, pairwise_distances

SCHEMA_VERSION = 1

ALGORITHMS = {"kmeans": None, "rs-kmeans": "rs", "ds-kmeans": "ds", "ids-kmeans": "ids"}

# Metric name -> whether larger is better. wall_time is informational.
METRICS = {
    "sse": False,
    "dunn": True,
    "jagota": False,
    "accuracy": True,
    "lloyd_iterations": False,
    "evaluations": False,
    "restarts": False,
    "wall_time": False,
}
AGGREGATES = ("mean", "median", "std", "best")

# Published reference values, transcribed, never recomputed here.
PUBLISHED_ACCURACY = {
    "iris": {"kmeans": 0.9267, "GA": 0.40, "GKM": 0.9267, "IGKM": 0.9267, "proposed": 0.90},
    "wine": {"kmeans": 0.6854, "GA": 0.4382, "GKM": 0.9831, "IGKM": 0.9831, "proposed": 0.9766},
    "glass": {"kmeans": 0.6308, "GA": 0.2336, "GKM": 0.8131, "IGKM": 0.8131, "proposed": 0.8092},
}
PUBLISHED_DUNN = {
    "iris": {"kmeans": 0.05855103, "proposed": 0.05923513},
    "wine": {"kmeans": 0.0080028, "proposed": 0.01200976},
}
PUBLISHED_JAGOTA = {
    "iris": {"kmeans": 0.7013746, "proposed": 0.651203},
    "wine": {"kmeans": 0.597923, "proposed": 0.527967},
}
PUBLISHED_ONLY = ("GA", "GKM", "IGKM")


@dataclass
class ExperimentConfig:
    dataset: str = "iris"
    schema: str | None = None
    algo: str = "ids-kmeans"
    k: int | None = None
    seeds: list[int] = field(default_factory=lambda: list(range(30)))
    preprocess: str = "none"
    depth: int = 3
    max_evals: int = 2000
    max_restarts: int = 10
    initial_step: float = 0.1
    collapse_rel: float = 1e-4
    alpha: float = 1.0
    gamma: float = 2.0
    rho: float = 0.5
    shrink: float = 0.5
    rs_step: float = 0.05
    max_iter: int = MAX_ITER
    jagota: str = "mean"
    traces: bool = True
    timing: bool = True
    format: str = "md"
    out: str | None = None
    jobs: int = 1

    def __post_init__(self):
        if self.algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algo!r}; choose from {sorted(ALGORITHMS)}")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if self.format not in ("md", "markdown", "csv", "json"):
            raise ValueError(f"unknown output format {self.format!r}")
        if self.preprocess not in ("none", "zscore", "minmax"):
            raise ValueError(f"unknown preprocessing mode {self.preprocess!r}")
        self.seeds = [int(s) for s in self.seeds]

    def seeding(self, k: int) -> SeedingConfig:
        ds = DsConfig(
            max_evals=self.max_evals,
            alpha=self.alpha,
            gamma=self.gamma,
            rho=self.rho,
            shrink=self.shrink,
            collapse_rel=self.collapse_rel,
            max_restarts=self.max_restarts,
            initial_step=self.initial_step,
        )
        return SeedingConfig(
            k=k,
            depth=self.depth,
            ds=ds,
            final_max_iter=self.max_iter,
            rs=RsConfig(max_evals=self.max_evals),
            rs_step=self.rs_step,
        )

    def to_dict(self) -> dict:
        return asdict(self)


def load_dataset(cfg: ExperimentConfig) -> LabeledDataset:
    if cfg.schema is None and cfg.dataset in BUILTIN_SCHEMAS:
        ds = load_builtin(cfg.dataset)
    else:
        if cfg.schema is None:
            raise ValueError(f"{cfg.dataset!r} is not a builtin dataset; a schema is required")
        ds = load_csv(cfg.dataset, parse_schema(cfg.schema))
    return standardize(ds, cfg.preprocess)


def resolve_k(cfg: ExperimentConfig, ds: LabeledDataset) -> int:
    if cfg.k is not None:
        return cfg.k
    return BUILTIN_K.get(cfg.dataset, ds.n_classes)


@dataclass
class SeedRecord:
    seed: int
    sse: float
    dunn: float | None
    jagota: float
    accuracy: float | None
    lloyd_iterations: int
    evaluations: int
    restarts: int
    wall_time: float | None
    simplex_loops: int = 0
    inner_iterations: int = 0
    search_distance_computations: int = 0
    final_distance_computations: int = 0
    # (iteration, sse, dunn, jagota) of the final Lloyd phase
    trace: list[list] = field(default_factory=list)


@dataclass
class RunReport:
    config: dict
    dataset: str
    n: int
    d: int
    k: int
    n_classes: int
    records: list[SeedRecord]
    aggregates: dict[str, dict[str, float | None]]
    best_sse_seed: int
    schema_version: int = SCHEMA_VERSION

    @property
    def algo(self) -> str:
        return self.config["algo"]

    def record(self, seed: int) -> SeedRecord:
        return next(r for r in self.records if r.seed == seed)

    @property
    def best_sse_record(self) -> SeedRecord:
        return self.record(self.best_sse_seed)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "RunReport":
        doc = dict(doc)
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema version {doc.get('schema_version')}")
        doc["records"] = [SeedRecord(**r) for r in doc["records"]]
        return cls(**doc)


def _finite_or_none(x):
    return None if x is None or not math.isfinite(x) else float(x)


def aggregate(records: list[SeedRecord]) -> dict[str, dict[str, float | None]]:
    out = {}
    for metric, larger_better in METRICS.items():
        values = [getattr(r, metric) for r in records]
        values = np.array([v for v in values if v is not None], dtype=float)
        if values.size == 0:
            out[metric] = {a: None for a in AGGREGATES}
            continue
        out[metric] = {
            "mean": float(values.mean()),
            "median": float(np.median(values)),
            "std": float(values.std()),
            "best": float(values.max() if larger_better else values.min()),
        }
    return out


def _run_seed(cfg: ExperimentConfig, ds: LabeledDataset, k: int, seed: int,
              distances: np.ndarray) -> SeedRecord:
    rng = np.random.default_rng(seed)
    points = ds.data

    def safe_dunn(labels):
        try:
            return dunn_index(points, labels, distances)
        except UndefinedIndex:
            return None

    def observer(labels, centroids):
        return safe_dunn(labels), jagota_index(points, labels, centroids, cfg.jagota)

    start = time.perf_counter()
    method = ALGORITHMS[cfg.algo]
    if method is None:
        result = kmeans(points, k, rng, max_iter=cfg.max_iter, observer=observer if cfg.traces else None)
        evaluations = restarts = loops = inner = search_dc = 0
    else:
        result = seeded_kmeans(points, cfg.seeding(k), rng, method,
                               observer=observer if cfg.traces else None)
        search = result.optimizer
        evaluations = search.result.evaluations
        restarts = search.result.restarts
        loops = search.result.iterations
        inner = search.inner_iterations
        search_dc = search.distance_computations
    elapsed = time.perf_counter() - start

    acc = None
    if k == ds.n_classes:
        acc = clustering_accuracy(result.assignments, ds.labels, k, ds.n_classes)
    trace = [
        [rec.iteration, rec.sse, _finite_or_none(rec.dunn), rec.jagota]
        for rec in result.trace
    ] if cfg.traces else []
    return SeedRecord(
        seed=seed,
        sse=result.sse,
        dunn=safe_dunn(result.assignments),
        jagota=jagota_index(points, result.assignments, result.centroids, cfg.jagota),
        accuracy=acc,
        lloyd_iterations=result.iterations,
        evaluations=evaluations,
        restarts=restarts,
        wall_time=elapsed if cfg.timing else None,
        simplex_loops=loops,
        inner_iterations=inner,
        search_distance_computations=search_dc,
        final_distance_computations=result.distance_computations,
        trace=trace,
    )


def _worker(args) -> SeedRecord:
    cfg, seed = args
    ds = load_dataset(cfg)
    return _run_seed(cfg, ds, resolve_k(cfg, ds), seed, pairwise_distances(ds.data))


def run_experiment(cfg: ExperimentConfig) -> RunReport:
    ds = load_dataset(cfg)
    k = resolve_k(cfg, ds)
    if not 1 <= k <= ds.rows:
        raise ValueError(f"K={k} must lie in [1, {ds.rows}]")
    if cfg.jobs > 1 and len(cfg.seeds) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            records = list(pool.map(_worker, [(cfg, s) for s in cfg.seeds]))
    else:
        distances = pairwise_distances(ds.data)
        records = [_run_seed(cfg, ds, k, s, distances) for s in cfg.seeds]

    best = min(records, key=lambda r: (r.sse, cfg.seeds.index(r.seed)))
    return RunReport(
        config=cfg.to_dict(),
        dataset=ds.name,
        n=ds.rows,
        d=ds.cols,
        k=k,
        n_classes=ds.n_classes,
        records=records,
        aggregates=aggregate(records),
        best_sse_seed=best.seed,
    )


# ------------------------------------------------------------------------ comparison


@dataclass
class Comparison:
    dataset: str
    columns: list[str]
    rows: dict[str, list[float | None]]

    def column(self, name: str) -> dict[str, float | None]:
        j = self.columns.index(name)
        return {metric: values[j] for metric, values in self.rows.items()}


COMPARE_ROWS = (
    "accuracy (lowest-SSE run)",
    "dunn (median)",
    "jagota (median)",
    "sse (median)",
    "evaluations (mean)",
    "lloyd iterations (median)",
)


def _summary(report: RunReport) -> list[float | None]:
    agg = report.aggregates
    return [
        report.best_sse_record.accuracy,
        agg["dunn"]["median"],
        agg["jagota"]["median"],
        agg["sse"]["median"],
        agg["evaluations"]["mean"],
        agg["lloyd_iterations"]["median"],
    ]


def compare(items: list) -> Comparison:
    """Side-by-side table; each item is an ExperimentConfig or a finished RunReport.

    Published values for the genetic baselines and the reported reference columns are
    appended for builtin datasets, labelled as not reproduced.
    """
    if len(items) < 2:
        raise ValueError("compare needs at least two configurations")
    reports = [run_experiment(i) if isinstance(i, ExperimentConfig) else i for i in items]
    key = {(r.config["dataset"], r.config["preprocess"], r.k) for r in reports}
    if len(key) != 1:
        raise ValueError("compared configurations must share dataset, preprocessing and K")

    dataset = reports[0].config["dataset"]
    columns: list[str] = []
    rows: dict[str, list] = {name: [] for name in COMPARE_ROWS}
    for report in reports:
        label = report.algo
        n = 2
        while label in columns:
            label = f"{report.algo}#{n}"
            n += 1
        columns.append(label)
        for name, value in zip(COMPARE_ROWS, _summary(report)):
            rows[name].append(value)

    if dataset in PUBLISHED_ACCURACY:
        published = [
            ("kmeans", "k-means (published)"),
            ("proposed", "proposed (published)"),
        ] + [(alg, f"{alg} (published, not reproduced)") for alg in PUBLISHED_ONLY]
        for src, label in published:
            columns.append(label)
            values = {
                "accuracy (lowest-SSE run)": PUBLISHED_ACCURACY[dataset].get(src),
                "dunn (median)": PUBLISHED_DUNN.get(dataset, {}).get(src),
                "jagota (median)": PUBLISHED_JAGOTA.get(dataset, {}).get(src),
            }
            for name in COMPARE_ROWS:
                rows[name].append(values.get(name))
    return Comparison(dataset, columns, rows)


def comparison_markdown(cmp: Comparison) -> str:
    lines = [f"## {cmp.dataset}", ""]
    lines.append("| metric | " + " | ".join(cmp.columns) + " |")
    lines.append("|" + "---|" * (len(cmp.columns) + 1))
    for metric, values in cmp.rows.items():
        lines.append(f"| {metric} | " + " | ".join(_fmt(v) for v in values) + " |")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------- output


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def to_markdown(report: RunReport) -> str:
    metrics = list(METRICS)
    header = "| seed | " + " | ".join(metrics) + " |"
    rule = "|" + "---|" * (len(metrics) + 1)
    cfg = report.config
    lines = [
        f"# {cfg['algo']} on {report.dataset} (n={report.n}, d={report.d}, K={report.k}, "
        f"preprocess={cfg['preprocess']})",
        "",
        header,
        rule,
    ]
    for r in report.records:
        lines.append(f"| {r.seed} | " + " | ".join(_fmt(getattr(r, m)) for m in metrics) + " |")
    lines += ["", "| aggregate | " + " | ".join(metrics) + " |", rule]
    for a in AGGREGATES:
        lines.append(f"| {a} | " + " | ".join(_fmt(report.aggregates[m][a]) for m in metrics) + " |")
    best = report.best_sse_record
    lines += ["", f"Lowest-SSE run: seed {best.seed}, SSE {_fmt(best.sse)}, accuracy {_fmt(best.accuracy)}"]
    if report.dataset in PUBLISHED_ACCURACY:
        ref = PUBLISHED_ACCURACY[report.dataset]
        lines.append(
            f"Published reference accuracy: k-means {ref['kmeans']:.2%}, proposed {ref['proposed']:.2%}"
        )
    return "\n".join(lines) + "\n"


def to_csv(report: RunReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    metrics = list(METRICS)
    writer.writerow(["aggregate", "seed"] + metrics)
    for r in report.records:
        writer.writerow([""] + [r.seed] + [_csv_value(getattr(r, m)) for m in metrics])
    for a in AGGREGATES:
        writer.writerow([a, ""] + [_csv_value(report.aggregates[m][a]) for m in metrics])
    return buf.getvalue()


def _csv_value(v):
    return "" if v is None else repr(v) if isinstance(v, float) else v


def to_json(report: RunReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"


def trace_csv(record: SeedRecord) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["final_lloyd_iteration", "sse", "dunn", "jagota"])
    for row in record.trace:
        writer.writerow([_csv_value(v) for v in row])
    return buf.getvalue()


RENDERERS = {"md": to_markdown, "markdown": to_markdown, "csv": to_csv, "json": to_json}


def emit(report: RunReport, fmt: str, path: str | Path | None, traces: bool = False) -> str:
    """Render ``report`` and write it to ``path`` (if given).

    With ``traces`` each seed's final-phase trace goes to
    ``<stem>.trace.seed<N>.csv`` next to ``path``.
    """
    if fmt not in RENDERERS:
        raise ValueError(f"unknown output format {fmt!r}")
    text = RENDERERS[fmt](report)
    if path is not None:
        path = Path(path)
        path.write_text(text, encoding="utf-8")
        if traces:
            for record in report.records:
                trace_path = path.with_name(f"{path.stem}.trace.seed{record.seed}.csv")
                trace_path.write_text(trace_csv(record), encoding="utf-8")
    return text


def read_json(path: str | Path) -> RunReport:
    return RunReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# --------------------------------------------------------------------- cost counters


@dataclass
class CostSummary:
    n: int
    k: int
    attributes: int
    depth: int
    c: int  # attributes + 1
    simplex_vertices: int  # K * attributes + 1, the searched simplex
    evaluations: float
    simplex_loops: float
    restarts: float
    inner_iterations: float
    predicted_operations: float  # c * loops * k * n * depth
    measured_distance_computations: float

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def cost_counters(report: RunReport) -> CostSummary:
    """Per-seed means of the search cost counters next to the c*l*k*n*d model."""
    if report.algo == "kmeans":
        raise ValueError("cost counters describe a seeded run, not plain k-means")
    recs = report.records

    def mean(attr):
        return float(np.mean([getattr(r, attr) for r in recs]))

    depth = report.config["depth"]
    c = report.d + 1
    loops = mean("simplex_loops")
    return CostSummary(
        n=report.n,
        k=report.k,
        attributes=report.d,
        depth=depth,
        c=c,
        simplex_vertices=report.k * report.d + 1,
        evaluations=mean("evaluations"),
        simplex_loops=loops,
        restarts=mean("restarts"),
        inner_iterations=mean("inner_iterations"),
        predicted_operations=c * loops * report.k * report.n * depth,
        measured_distance_computations=mean("search_distance_computations"),
    )
