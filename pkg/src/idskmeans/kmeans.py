"""Lloyd's k-means: assign to nearest centroid, recompute means, repeat."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

MAX_ITER = 300


@dataclass
class IterationRecord:
    iteration: int
    sse: float
    dunn: float | None = None
    jagota: float | None = None


@dataclass
class Clustering:
    assignments: np.ndarray
    centroids: np.ndarray
    sse: float
    iterations: int
    trace: list[IterationRecord] = field(default_factory=list)
    converged: bool = False
    # point-to-centroid distance evaluations spent, n*K per assignment pass
    distance_computations: int = 0
    optimizer: object = None

    @property
    def k(self) -> int:
        return self.centroids.shape[0]


def _check(points, centroids):
    points = np.asarray(points, dtype=float)
    centroids = np.asarray(centroids, dtype=float)
    if points.ndim != 2 or centroids.ndim != 2:
        raise ValueError("points and centroids must be 2-D")
    if centroids.shape[0] == 0:
        raise ValueError("need at least one centroid")
    if points.shape[1] != centroids.shape[1]:
        raise ValueError(
            f"dimension mismatch: points have {points.shape[1]} columns, "
            f"centroids {centroids.shape[1]}"
        )
    return points, centroids


def squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def assign(points, centroids) -> tuple[np.ndarray, float]:
    """Nearest-centroid labels (lowest id wins ties) and the resulting SSE."""
    points, centroids = _check(points, centroids)
    d2 = squared_distances(points, centroids)
    labels = np.argmin(d2, axis=1)
    sse = float(d2[np.arange(len(points)), labels].sum())
    return labels, sse


def update_centroids(points, assignments, k: int, prev) -> np.ndarray:
    """Cluster means; an empty cluster takes the point farthest from its own centroid.

    Donor clusters keep their mean for this step; several empty clusters take
    successively farther distinct points.
    """
    points = np.asarray(points, dtype=float)
    assignments = np.asarray(assignments)
    prev = np.asarray(prev, dtype=float)
    counts = np.bincount(assignments, minlength=k)
    sums = np.zeros((k, points.shape[1]))
    np.add.at(sums, assignments, points)
    centroids = prev.copy()
    filled = counts > 0
    centroids[filled] = sums[filled] / counts[filled, None]

    empty = np.flatnonzero(~filled)
    if empty.size:
        own = points - centroids[assignments]
        dist = np.einsum("nd,nd->n", own, own)
        # stable order: larger distance first, lower index on ties
        order = np.lexsort((np.arange(len(points)), -dist))
        for slot, idx in zip(empty, order):
            centroids[slot] = points[idx]
    return centroids


def lloyd(
    points,
    init,
    max_iter: int = MAX_ITER,
    tol: float = 0.0,
    observer: Callable[[np.ndarray, np.ndarray], tuple[float, float]] | None = None,
) -> Clustering:
    """Run Lloyd iterations from ``init``.

    Stops when assignments no longer change, when the SSE gain of an iteration
    falls below ``tol`` (``tol > 0`` only), or after ``max_iter`` updates.
    ``observer(assignments, centroids)`` returns ``(dunn, jagota)`` snapshots
    recorded alongside the SSE of each iteration, including iteration 0.
    """
    points, centroids = _check(points, init)
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    n, k = points.shape[0], centroids.shape[0]
    if k > n:
        raise ValueError(f"K={k} exceeds the number of points n={n}")

    def record(it, labels, cents, sse):
        rec = IterationRecord(it, sse)
        if observer is not None:
            rec.dunn, rec.jagota = observer(labels, cents)
        return rec

    labels, sse = assign(points, centroids)
    passes = 1
    trace = [record(0, labels, centroids, sse)]
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        centroids = update_centroids(points, labels, k, centroids)
        new_labels, new_sse = assign(points, centroids)
        passes += 1
        gain = sse - new_sse
        unchanged = np.array_equal(new_labels, labels)
        labels, sse = new_labels, new_sse
        trace.append(record(it, labels, centroids, sse))
        if unchanged or (tol > 0 and gain < tol):
            converged = unchanged
            break

    return Clustering(
        assignments=labels,
        centroids=centroids,
        sse=sse,
        iterations=it,
        trace=trace,
        converged=converged,
        distance_computations=passes * n * k,
    )


def forgy_init(points, k: int, rng: np.random.Generator) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"cannot draw K={k} distinct rows from n={n} points")
    idx = rng.choice(n, size=k, replace=False)
    return points[idx].copy()


def kmeans(points, k: int, rng: np.random.Generator, max_iter: int = MAX_ITER,
           tol: float = 0.0, observer=None) -> Clustering:
    """Forgy-initialised k-means."""
    return lloyd(points, forgy_init(points, k, rng), max_iter=max_iter, tol=tol, observer=observer)
