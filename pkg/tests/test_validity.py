import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from idskmeans.dataset import load_builtin
from idskmeans.kmeans import kmeans
from idskmeans.validity import (
    UndefinedIndex,
    accuracy,
    clustering_accuracy,
    confusion,
    dunn_index,
    jagota_index,
)

from oracles import permutation_accuracy

# multiples of 1/8: no subnormals, no precision loss under shifts
coords = st.integers(-400, 400).map(lambda i: i / 8)


@st.composite
def labelled_points(draw, min_k=2, max_k=4):
    k = draw(st.integers(min_k, max_k))
    n = draw(st.integers(k, 20))
    d = draw(st.integers(1, 3))
    pts = draw(arrays(np.float64, (n, d), elements=coords))
    labels = draw(st.lists(st.integers(0, k - 1), min_size=n, max_size=n))
    labels = np.array(labels)
    labels[:k] = np.arange(k)  # every cluster non-empty
    return pts, labels, k


def means(pts, labels, k):
    return np.array([pts[labels == j].mean(axis=0) for j in range(k)])


# ----------------------------------------------------------------------- Dunn


def test_dunn_hand_geometry():
    pts = np.array([[0, 0], [0, 1], [10, 0], [10, 1]], dtype=float)
    assert dunn_index(pts, [0, 0, 1, 1]) == pytest.approx(10.0)


def test_dunn_scale_example():
    pts = np.array([[0, 0], [0, 1], [10, 0], [10, 1]], dtype=float)
    assert dunn_index(3 * pts, [0, 0, 1, 1]) == pytest.approx(10.0)


def test_dunn_undefined_cases():
    with pytest.raises(UndefinedIndex):
        dunn_index([[0.0], [1.0]], [0, 0])
    with pytest.raises(UndefinedIndex):
        dunn_index([[0.0], [1.0]], [0, 1])


@settings(max_examples=80, deadline=None)
@given(labelled_points(), st.floats(0.1, 20), st.lists(st.floats(-100, 100), min_size=3, max_size=3), st.data())
def test_dunn_invariances(sample, scale, shift, data):
    pts, labels, k = sample
    try:
        base = dunn_index(pts, labels)
    except UndefinedIndex:
        assume(False)
    perm = np.array(data.draw(st.permutations(range(k))))
    shift = np.array(shift[: pts.shape[1]])
    assert dunn_index(pts, perm[labels]) == pytest.approx(base, rel=1e-9, abs=1e-12)
    assert dunn_index(pts + shift, labels) == pytest.approx(base, rel=1e-6, abs=1e-9)
    assert dunn_index(pts * scale, labels) == pytest.approx(base, rel=1e-9, abs=1e-12)


# --------------------------------------------------------------------- Jagota


def test_jagota_hand_arithmetic():
    pts = np.array([[0, 0], [2, 0], [5, 5]], dtype=float)
    cents = np.array([[1, 0], [5, 5]], dtype=float)
    assert jagota_index(pts, [0, 0, 1], cents, "sum") == pytest.approx(1.0)
    assert jagota_index(pts, [0, 0, 1], cents) == pytest.approx(0.5)


def test_jagota_zero_at_centroids():
    pts = np.array([[1, 2], [3, 4]], dtype=float)
    assert jagota_index(pts, [0, 1], pts) == 0.0


def test_jagota_dimension_mismatch():
    with pytest.raises(ValueError):
        jagota_index([[0.0, 1.0]], [0], [[0.0]])


@settings(max_examples=80, deadline=None)
@given(labelled_points(min_k=1), st.floats(0.01, 100), st.sampled_from(["mean", "sum"]))
def test_jagota_scaling_and_sign(sample, scale, reduction):
    pts, labels, k = sample
    cents = means(pts, labels, k)
    base = jagota_index(pts, labels, cents, reduction)
    assert base >= 0
    scaled = jagota_index(scale * pts, labels, scale * cents, reduction)
    assert scaled == pytest.approx(scale * base, rel=1e-9, abs=1e-9)
    at_centroids = jagota_index(cents[labels], labels, cents, reduction)
    assert at_centroids == 0.0
    if np.any(pts != cents[labels]):
        assert base > 0


def test_jagota_reductions_relate_by_cluster_count():
    pts = load_builtin("iris").data
    run = kmeans(pts, 3, np.random.default_rng(0))
    mean = jagota_index(pts, run.assignments, run.centroids, "mean")
    total = jagota_index(pts, run.assignments, run.centroids, "sum")
    assert total == pytest.approx(3 * mean)


# ------------------------------------------------------------------- accuracy


def test_confusion_example():
    cm = confusion([0, 0, 1, 1], [1, 1, 0, 0], 2, 2)
    assert cm.tolist() == [[0, 2], [2, 0]]
    assert accuracy(cm) == 1.0


def test_accuracy_best_of_two_mappings():
    assert clustering_accuracy([0, 1, 1], [0, 0, 1], 2, 2) == pytest.approx(2 / 3)


def test_confusion_out_of_range():
    with pytest.raises(ValueError):
        confusion([0, 2], [0, 1], 2, 2)
    with pytest.raises(ValueError):
        confusion([0, 1], [0, 5], 2, 2)


def test_accuracy_requires_square():
    with pytest.raises(ValueError):
        accuracy(np.ones((2, 3), dtype=int))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(1, 60), st.integers(0, 10_000))
def test_confusion_margins(k, c, n, seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, k, n)
    y = rng.integers(0, c, n)
    cm = confusion(a, y, k, c)
    assert cm.sum() == n
    assert cm.sum(axis=1).tolist() == np.bincount(a, minlength=k).tolist()
    assert cm.sum(axis=0).tolist() == np.bincount(y, minlength=c).tolist()


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_accuracy_equals_permutation_brute_force(k, seed):
    cm = np.random.default_rng(seed).integers(0, 20, size=(k, k))
    cm[0, 0] += 1
    assert accuracy(cm) == pytest.approx(permutation_accuracy(cm), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5), st.integers(5, 60), st.integers(0, 10_000), st.data())
def test_accuracy_permutation_invariance(k, n, seed, data):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, k, n)
    y = rng.integers(0, k, n)
    base = clustering_accuracy(a, y, k, k)
    pa = np.array(data.draw(st.permutations(range(k))))
    py = np.array(data.draw(st.permutations(range(k))))
    assert clustering_accuracy(pa[a], py[y], k, k) == pytest.approx(base)
    # accuracy is 1 exactly when the partitions agree up to relabelling
    assert clustering_accuracy(pa[y], y, k, k) == 1.0
    if base == 1.0:
        assert len({(i, j) for i, j in zip(a, y)}) == len(set(a))


def test_accuracy_below_one_for_different_partition():
    assert clustering_accuracy([0, 0, 1, 1], [0, 1, 0, 1], 2, 2) < 1.0


# ------------------------------------------------------ magnitudes on raw Iris


def test_iris_kmeans_index_magnitudes():
    pts = load_builtin("iris").data
    run = min((kmeans(pts, 3, np.random.default_rng(s)) for s in range(20)), key=lambda r: r.sse)
    assert 0.03 <= dunn_index(pts, run.assignments) <= 0.12
    assert jagota_index(pts, run.assignments, run.centroids) == pytest.approx(0.70, abs=0.1)
