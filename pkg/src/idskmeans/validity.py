"""Cluster validity: Dunn index, Jagota index, and matched accuracy."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist


class UndefinedIndex(ValueError):
    pass


def pairwise_distances(points) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    return cdist(points, points)


def dunn_index(points, assignments, distances: np.ndarray | None = None) -> float:
    """Smallest single-linkage gap between clusters over the largest cluster diameter.

    ``distances`` may carry a precomputed n x n Euclidean distance matrix.
    """
    assignments = np.asarray(assignments)
    if distances is None:
        distances = pairwise_distances(points)
    clusters = [np.flatnonzero(assignments == k) for k in np.unique(assignments)]
    if len(clusters) < 2:
        raise UndefinedIndex("Dunn index needs at least two non-empty clusters")

    diameter = max(distances[np.ix_(c, c)].max() for c in clusters)
    if diameter == 0:
        raise UndefinedIndex("Dunn index undefined: every cluster has zero diameter")
    gap = min(
        distances[np.ix_(a, b)].min()
        for i, a in enumerate(clusters)
        for b in clusters[i + 1:]
    )
    return float(gap / diameter)


def jagota_index(points, assignments, centroids, reduction: str = "mean") -> float:
    """Average member-to-centroid Euclidean distance per cluster, combined over clusters.

    ``reduction="mean"`` averages the per-cluster values over the non-empty
    clusters; ``reduction="sum"`` adds them up.
    """
    points = np.asarray(points, dtype=float)
    centroids = np.asarray(centroids, dtype=float)
    assignments = np.asarray(assignments)
    if points.shape[1] != centroids.shape[1]:
        raise ValueError("dimension mismatch between points and centroids")
    if assignments.shape != (points.shape[0],):
        raise ValueError("one assignment per point is required")
    if assignments.size and (assignments.min() < 0 or assignments.max() >= len(centroids)):
        raise ValueError("assignment refers to a missing centroid")

    dist = np.linalg.norm(points - centroids[assignments], axis=1)
    counts = np.bincount(assignments, minlength=len(centroids))
    totals = np.bincount(assignments, weights=dist, minlength=len(centroids))
    present = counts > 0
    per_cluster = totals[present] / counts[present]
    if reduction == "mean":
        return float(per_cluster.mean())
    if reduction == "sum":
        return float(per_cluster.sum())
    raise ValueError(f"unknown reduction {reduction!r}")


def confusion(assignments, labels, k: int, c: int) -> np.ndarray:
    """``counts[cluster, class]`` contingency table."""
    assignments = np.asarray(assignments)
    labels = np.asarray(labels)
    if assignments.shape != labels.shape:
        raise ValueError("assignments and labels must have equal length")
    if assignments.size:
        if assignments.min() < 0 or assignments.max() >= k:
            raise ValueError("cluster id out of range")
        if labels.min() < 0 or labels.max() >= c:
            raise ValueError("class id out of range")
    counts = np.zeros((k, c), dtype=np.int64)
    np.add.at(counts, (assignments, labels), 1)
    return counts


def accuracy(cm) -> float:
    """Fraction of objects covered by the best one-to-one cluster/class matching."""
    cm = np.asarray(cm)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise ValueError(f"accuracy needs as many clusters as classes, got {cm.shape}")
    total = cm.sum()
    if total == 0:
        raise ValueError("empty confusion matrix")
    rows, cols = linear_sum_assignment(cm, maximize=True)
    return float(cm[rows, cols].sum() / total)


def clustering_accuracy(assignments, labels, k: int, c: int) -> float:
    return accuracy(confusion(assignments, labels, k, c))
