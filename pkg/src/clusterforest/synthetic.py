"""Synthetic datasets: the documented drifting stream and helper blobs.

The drifting stream is two Gaussian class-conditionals on a circle whose
centers rotate by a fixed angle per batch, so later batches come from a
slightly different distribution than the initial set. The held-out test
set is drawn at the final-batch angle: a model retrained with the
accumulating batches tracks the drift and its test score rises. All
constants are fixed defaults of :func:`drifting_stream`; draws use the
portable generator, so a seed pins the whole stream.

Default geometry: d = 4 with two informative coordinates (the rotating
center at radius 1.5, class 1 diametrically opposite) and two pure-noise
coordinates; within-class spread 1.0 everywhere; balanced labels.
"""

from __future__ import annotations

import numpy as np

from .data import Dataset
from .rng import Rng, derive_seed

STREAM_CLASSES = ("neg", "pos")


def _blob_rows(rng: Rng, n: int, center: np.ndarray, sigma: float, d: int) -> np.ndarray:
    X = np.empty((n, d))
    for i in range(n):
        for j in range(d):
            X[i, j] = rng.normal()
    X *= sigma
    X[:, : len(center)] += center
    return X


def _labelled_blobs(rng: Rng, n: int, angle: float, radius: float, sigma: float, d: int) -> Dataset:
    center = radius * np.array([np.cos(angle), np.sin(angle)])
    y = np.array([rng.below(2) for _ in range(n)], dtype=np.int64)
    X = np.empty((n, d))
    for i in range(n):
        c = center if y[i] == 1 else -center
        for j in range(d):
            X[i, j] = rng.normal() * sigma
        X[i, :2] += c
    return Dataset(X, y, STREAM_CLASSES)


def drifting_stream(
    n_initial: int,
    batch_sizes,
    n_test: int,
    seed: int,
    d: int = 4,
    radius: float = 1.5,
    sigma: float = 1.0,
    angle0: float = 0.0,
    angle_step: float = 0.12,
) -> tuple[Dataset, list[Dataset], Dataset]:
    """Initial set, per-batch datasets, and a test set at the final angle.

    Batch t (1-based) is drawn at angle0 + t * angle_step; the test set
    shares the final batch's angle, so scores improve as retraining
    absorbs batches drawn closer to the test distribution.
    """
    batch_sizes = list(batch_sizes)
    initial = _labelled_blobs(
        Rng(derive_seed(seed, "stream-initial")), n_initial, angle0, radius, sigma, d
    )
    batches = []
    for t, size in enumerate(batch_sizes, start=1):
        rng = Rng(derive_seed(seed, "stream-batch", t))
        batches.append(_labelled_blobs(rng, size, angle0 + t * angle_step, radius, sigma, d))
    final_angle = angle0 + len(batch_sizes) * angle_step
    test = _labelled_blobs(
        Rng(derive_seed(seed, "stream-test")), n_test, final_angle, radius, sigma, d
    )
    return initial, batches, test


def gaussian_blobs(
    n_per_blob: int,
    centers,
    sigma: float,
    seed: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Isotropic Gaussian blobs; returns (points, blob index per point)."""
    centers = np.asarray(centers, dtype=np.float64)
    rng = Rng(seed)
    d = centers.shape[1]
    points, labels = [], []
    for b, c in enumerate(centers):
        points.append(_blob_rows(rng, n_per_blob, c, sigma, d))
        labels.extend([b] * n_per_blob)
    return np.vstack(points), np.array(labels, dtype=np.int64)


def unbalanced_binary(
    n: int,
    positive_fraction: float,
    seed: int,
    d: int = 3,
    separation: float = 1.2,
    sigma: float = 1.0,
) -> Dataset:
    """Overlapping two-class set with a skewed label split (e.g. 70/30)."""
    rng = Rng(seed)
    y = (rng.random_array(n) < positive_fraction).astype(np.int64)
    X = np.empty((n, d))
    for i in range(n):
        for j in range(d):
            X[i, j] = rng.normal() * sigma
        X[i, 0] += separation if y[i] == 1 else -separation
    return Dataset(X, y, STREAM_CLASSES)
