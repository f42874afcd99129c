"""Weighted k-means with a configurable estimation-noise emulation.

The metric is the per-feature weighted squared Euclidean distance
d_w^2(x, c) = sum_j w_j * (x_j - c_j)^2 with nonnegative weights from
:mod:`clusterforest.weights`. Lloyd iteration with k-means++ seeding runs
either exactly or under an error model that mimics approximate distance
estimation: each evaluated distance picks up an independent multiplicative
error of bounded size (occasionally doubled, modelling a failed estimate),
and assignments within a near-tie window of the minimum are resolved at
random. An all-zero noise configuration takes the exact code path and is
byte-identical to it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientPointsError, ShapeError
from .rng import Rng, derive_seed
from .weights import FeatureWeights

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 1000


@dataclass
class NoiseConfig:
    """Knobs of the estimation-error emulation.

    eps1        bound of the multiplicative error on each distance
    delta_fail  probability that an estimate "fails" and the error range
                doubles
    delta_tie   near-tie window: candidates within delta_tie of the noisy
                minimum are chosen among uniformly at random
    eps4        additive error bound on leaf class counts
    eps2        optional additive centroid perturbation after each update
                (off by default)
    seed        extra entropy mixed into the noise stream so noise draws
                are independent of initialization draws
    """

    eps1: float = 0.0
    delta_fail: float = 0.0
    delta_tie: float = 0.0
    eps4: float = 0.0
    eps2: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("eps1", "delta_tie", "eps4", "eps2"):
            if getattr(self, name) < 0:
                raise ShapeError(f"{name} must be nonnegative")
        if not 0.0 <= self.delta_fail < 0.5:
            raise ShapeError("delta_fail must be in [0, 0.5)")

    def is_zero(self) -> bool:
        return (
            self.eps1 == 0.0
            and self.delta_fail == 0.0
            and self.delta_tie == 0.0
            and self.eps4 == 0.0
            and self.eps2 == 0.0
        )


NO_NOISE = NoiseConfig()


@dataclass
class Centroids:
    """k cluster centers plus convergence diagnostics.

    ``inertia_trace`` records the exact (noise-free) weighted inertia after
    every assignment step, which is what the Lloyd monotonicity property
    is stated about.
    """

    vectors: np.ndarray  # (k, d)
    n_iter: int = 0
    converged: bool = False
    inertia_trace: list = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.vectors.shape[0]


def weighted_sq_distance(x: np.ndarray, c: np.ndarray, w: FeatureWeights) -> float:
    """sum_j w_j (x_j - c_j)^2 for a single point/centroid pair."""
    x = np.asarray(x, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    if x.shape != c.shape or len(x) != w.d:
        raise ShapeError("point, centroid and weights must share one length")
    return float(np.sum(w.normalized * (x - c) ** 2))


def _distance_matrix(points: np.ndarray, centroids: np.ndarray, w: FeatureWeights) -> np.ndarray:
    """Weighted squared distances, shape (n_points, k). Fixed index-order sums."""
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,d->nk", diff * diff, w.normalized)


def kmeanspp_init(points: np.ndarray, k: int, w: FeatureWeights, seed: int) -> Centroids:
    """Pick k starting centroids by D^2 sampling under the weighted metric.

    The first centroid is uniform over the points; each following one is a
    point drawn with probability proportional to its weighted squared
    distance to the nearest centroid chosen so far. Needs at least k
    distinct points (duplicates carry no D^2 mass once selected).
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if k < 1:
        raise InsufficientPointsError("k must be >= 1")
    n_distinct = len(np.unique(points, axis=0))
    if n_distinct < k:
        raise InsufficientPointsError(f"{n_distinct} distinct points for k={k}")
    rng = Rng(seed)
    chosen = [rng.below(n)]
    best = _distance_matrix(points, points[chosen[-1]][None, :], w)[:, 0]
    while len(chosen) < k:
        total = best.sum()
        if total <= 0.0:
            # all remaining mass at chosen locations; grab any unused distinct point
            for i in range(n):
                if not any(np.array_equal(points[i], points[j]) for j in chosen):
                    chosen.append(i)
                    break
        else:
            r = rng.random() * total
            idx = int(np.searchsorted(np.cumsum(best), r, side="right"))
            idx = min(idx, n - 1)
            chosen.append(idx)
        d_new = _distance_matrix(points, points[chosen[-1]][None, :], w)[:, 0]
        best = np.minimum(best, d_new)
    return Centroids(vectors=points[chosen].copy())


def assign(
    points: np.ndarray,
    centroids: Centroids,
    w: FeatureWeights,
    noise: NoiseConfig = NO_NOISE,
    noise_rng: Rng | None = None,
) -> np.ndarray:
    """Map every point to (noisily) nearest centroid; ties to lowest index.

    With noise active, each of the n*k distance estimates is scaled by an
    independent factor uniform in [1-eps1, 1+eps1] (range doubled with
    probability delta_fail), and any centroid whose noisy distance lands
    within delta_tie of the row minimum may be picked uniformly at random.
    """
    points = np.asarray(points, dtype=np.float64)
    d2 = _distance_matrix(points, centroids.vectors, w)
    if noise.is_zero():
        return np.argmin(d2, axis=1)
    if noise_rng is None:
        noise_rng = Rng(noise.seed)
    n, k = d2.shape
    if noise.eps1 > 0.0:
        factors = np.empty(n * k)
        for i in range(n * k):
            half = noise.eps1
            if noise.delta_fail > 0.0 and noise_rng.random() < noise.delta_fail:
                half = 2.0 * noise.eps1
            factors[i] = noise_rng.uniform(1.0 - half, 1.0 + half)
        d2 = d2 * factors.reshape(n, k)
    out = np.empty(n, dtype=np.int64)
    if noise.delta_tie > 0.0:
        for i in range(n):
            row = d2[i]
            near = np.flatnonzero(row <= row.min() + noise.delta_tie)
            out[i] = near[0] if len(near) == 1 else near[noise_rng.below(len(near))]
    else:
        out = np.argmin(d2, axis=1)
    return out


def update_centroids(
    points: np.ndarray,
    assignment: np.ndarray,
    k: int,
    prev: Centroids,
    w: FeatureWeights,
) -> Centroids:
    """Per-cluster means; empty clusters are reseeded deterministically.

    An empty cluster moves to the data point farthest (weighted) from the
    populated centroid nearest its previous position, which keeps k
    centers alive without consuming randomness.
    """
    points = np.asarray(points, dtype=np.float64)
    new = np.empty((k, points.shape[1]))
    counts = np.bincount(assignment, minlength=k)
    for l in range(k):
        if counts[l] > 0:
            new[l] = points[assignment == l].mean(axis=0)
    populated = np.flatnonzero(counts > 0)
    for l in np.flatnonzero(counts == 0):
        anchor_d2 = _distance_matrix(prev.vectors[l][None, :], new[populated], w)[0]
        anchor = new[populated[int(np.argmin(anchor_d2))]]
        far = _distance_matrix(points, anchor[None, :], w)[:, 0]
        new[l] = points[int(np.argmax(far))]
    return Centroids(vectors=new)


def _inertia(points, centroids, assignment, w) -> float:
    diff = points - centroids.vectors[assignment]
    return float(np.einsum("nd,d->", diff * diff, w.normalized))


def supervised_kmeans(
    points: np.ndarray,
    w: FeatureWeights,
    k: int,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    noise: NoiseConfig = NO_NOISE,
    seed: int = 0,
) -> tuple[Centroids, np.ndarray]:
    """Lloyd iteration under the weighted metric.

    Runs assignment/update rounds until the largest per-coordinate centroid
    shift drops below ``tol`` or ``max_iter`` rounds have run, then
    recomputes the assignment for the final centroids so the returned pair
    is consistent. The noise stream is seeded independently of the
    initialization stream, so noisy and exact runs share their k-means++
    seeding.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.shape[0] == 0:
        raise InsufficientPointsError("no points to cluster")
    cents = kmeanspp_init(points, k, w, seed)
    noise_rng = None if noise.is_zero() else Rng(derive_seed(seed, "noise", noise.seed))

    trace: list[float] = []
    converged = False
    it = 0
    while it < max_iter:
        assignment = assign(points, cents, w, noise, noise_rng)
        trace.append(_inertia(points, cents, assignment, w))
        new = update_centroids(points, assignment, k, cents, w)
        if noise.eps2 > 0.0:
            new.vectors = new.vectors + np.array(
                [noise_rng.uniform(-noise.eps2, noise.eps2) for _ in range(new.vectors.size)]
            ).reshape(new.vectors.shape)
        shift = float(np.max(np.abs(new.vectors - cents.vectors)))
        cents = new
        it += 1
        if shift < tol:
            converged = True
            break
    assignment = assign(points, cents, w, noise, noise_rng)
    trace.append(_inertia(points, cents, assignment, w))
    return (
        Centroids(vectors=cents.vectors, n_iter=it, converged=converged, inertia_trace=trace),
        assignment,
    )
