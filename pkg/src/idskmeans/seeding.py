"""Choosing initial k-means centroids by derivative-free search.

A candidate set of K centroids is flattened into one vector of length K*d.
Its score is the SSE reached after at most ``depth`` Lloyd iterations started
from those centroids. A (restarting) downhill simplex search minimises that
score, and the best candidate seeds a full k-means run.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .dataset import LabeledDataset, bounding_box
from .kmeans import MAX_ITER, Clustering, assign, forgy_init, lloyd
from .optimizers import (
    DsConfig,
    Objective,
    OptimizerResult,
    RsConfig,
    improved_downhill_simplex,
    init_simplex,
    random_search,
)

METHODS = ("ids", "ds", "rs")


def encode(centroids) -> np.ndarray:
    return np.asarray(centroids, dtype=float).reshape(-1).copy()


def decode(v, k: int, d: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (k * d,):
        raise ValueError(f"vector of length {v.size} cannot hold {k} centroids of dimension {d}")
    return v.reshape(k, d).copy()


class SeedingObjective(Objective):
    """Depth-capped k-means SSE of a flattened centroid vector.

    ``depth == 0`` scores the plain nearest-centroid assignment. Besides the
    evaluation count it tallies inner Lloyd iterations and point-to-centroid
    distance computations.
    """

    def __init__(self, points, k: int, depth: int):
        points = np.asarray(points, dtype=float)
        if not 1 <= k <= points.shape[0]:
            raise ValueError(f"K={k} must lie in [1, n={points.shape[0]}]")
        if depth < 0:
            raise ValueError("depth must be >= 0")
        self.points = points
        self.k = k
        self.depth = depth
        self.inner_iterations = 0
        self.distance_computations = 0
        super().__init__(self._sse, k * points.shape[1])

    def _sse(self, v: np.ndarray) -> float:
        centroids = decode(v, self.k, self.points.shape[1])
        if self.depth == 0:
            self.distance_computations += self.points.shape[0] * self.k
            return assign(self.points, centroids)[1]
        run = lloyd(self.points, centroids, max_iter=self.depth, tol=0.0)
        self.inner_iterations += run.iterations
        self.distance_computations += run.distance_computations
        return run.sse


def seeding_objective(points, k: int, depth: int) -> SeedingObjective:
    return SeedingObjective(points, k, depth)


@dataclass(frozen=True)
class SeedingConfig:
    k: int
    depth: int = 3
    ds: DsConfig = field(default_factory=DsConfig)
    final_max_iter: int = MAX_ITER
    rs: RsConfig = field(default_factory=RsConfig)
    # random-search dx std-dev as a fraction of each coordinate's box width
    rs_step: float = 0.05

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("K must be >= 1")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        if self.final_max_iter < 1:
            raise ValueError("final_max_iter must be >= 1")
        if not self.rs_step > 0:
            raise ValueError("rs_step must be > 0")


@dataclass
class SearchSummary:
    method: str
    result: OptimizerResult
    seed_centroids: np.ndarray
    inner_iterations: int
    distance_computations: int


def _points(data) -> np.ndarray:
    return data.data if isinstance(data, LabeledDataset) else np.asarray(data, dtype=float)


def search_seed(points, cfg: SeedingConfig, rng: np.random.Generator, method: str = "ids",
                objective: SeedingObjective | None = None) -> SearchSummary:
    """Run the centroid search only and return the chosen seed centroids."""
    if method not in METHODS:
        raise ValueError(f"unknown seeding method {method!r}")
    points = _points(points)
    n, d = points.shape
    k = cfg.k
    obj = objective if objective is not None else seeding_objective(points, k, cfg.depth)
    box = bounding_box(points).tile(k)
    widths = np.where(box.widths > 0, box.widths, 1.0)
    x0 = encode(forgy_init(points, k, rng))

    if method == "rs":
        rs_cfg = replace(cfg.rs, step_scale=cfg.rs_step * widths)
        result = random_search(obj, x0, rs_cfg, rng)
    else:
        ds_cfg = cfg.ds if method == "ids" else replace(cfg.ds, max_restarts=0)
        if ds_cfg.max_evals < k * d + 1:
            raise ValueError(
                f"max_evals={ds_cfg.max_evals} cannot cover the {k * d + 1} initial simplex vertices"
            )
        s0 = init_simplex(obj, x0, ds_cfg.initial_step * widths)
        result = improved_downhill_simplex(obj, box, ds_cfg, rng, s0=s0)

    return SearchSummary(
        method=method,
        result=result,
        seed_centroids=decode(result.best_point, k, d),
        inner_iterations=obj.inner_iterations,
        distance_computations=obj.distance_computations,
    )


def seeded_kmeans(data, cfg: SeedingConfig, rng: np.random.Generator, method: str = "ids",
                  observer=None) -> Clustering:
    """Search for initial centroids with ``method``, then run k-means to convergence."""
    points = _points(data)
    search = search_seed(points, cfg, rng, method)
    clustering = lloyd(points, search.seed_centroids, max_iter=cfg.final_max_iter, tol=0.0,
                       observer=observer)
    clustering.optimizer = search
    return clustering


def simplex_seeded_kmeans(data, cfg: SeedingConfig, rng: np.random.Generator,
                          observer=None) -> Clustering:
    """k-means seeded by the restarting downhill simplex search."""
    return seeded_kmeans(data, cfg, rng, "ids", observer=observer)
