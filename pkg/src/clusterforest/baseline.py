"""Depth-limited CART-style trees: the threshold-splitting reference model.

Greedy binary splits over an exhaustive scan of midpoint thresholds,
maximizing entropy gain for classification and variance reduction for
regression. The ensemble variant consumes exactly the same bootstrap draws
as the clustering forest for a shared seed, so the two models can be
compared on identical training samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, SampleSet, bootstrap_sample
from .errors import EmptyInputError
from .forest import leaf_label_classification, leaf_label_regression
from .rng import derive_seed

TASK_CLASSIFICATION = "classification"


@dataclass(eq=False)
class CartNode:
    depth: int
    feature: int | None = None
    threshold: float | None = None
    left: "CartNode | None" = None
    right: "CartNode | None" = None
    payload: object = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass(eq=False)
class CartTree:
    root: CartNode
    max_depth: int


@dataclass(eq=False)
class CartEnsemble:
    trees: list[CartTree]
    task: str
    classes: tuple[str, ...]
    feature_names: tuple[str, ...]
    sample_sets: list[SampleSet]
    n_trees_config: int
    max_depth: int
    min_leaf: int
    draw_size: int | None
    seed: int

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    @property
    def n_classes(self) -> int:
        return len(self.classes)


def _entropy_from_counts(counts: np.ndarray) -> np.ndarray:
    """Entropy in bits per row of a (m, n_classes) count matrix."""
    totals = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(totals > 0, counts / totals, 0.0)
        logs = np.where(p > 0, np.log2(p, where=p > 0), 0.0)
    return -(p * logs).sum(axis=-1)


def _best_split_classification(X, Y, n_classes, min_leaf):
    """Exhaustive (feature, threshold) scan by entropy gain.

    Returns (gain, feature, threshold) or None. Candidates are midpoints
    of consecutive distinct sorted values with at least min_leaf rows on
    each side; ties keep the lowest feature index, then lowest threshold.
    """
    n, d = X.shape
    counts = np.bincount(Y, minlength=n_classes).astype(np.float64)
    parent = float(_entropy_from_counts(counts[None, :])[0])
    best = None
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), Y] = 1.0
    for j in range(d):
        order = np.argsort(X[:, j], kind="mergesort")
        xs = X[order, j]
        cum = np.cumsum(onehot[order], axis=0)  # counts on the <= side
        cut = np.flatnonzero(xs[:-1] < xs[1:])  # split after position i
        cut = cut[(cut + 1 >= min_leaf) & (n - cut - 1 >= min_leaf)]
        if len(cut) == 0:
            continue
        left = cum[cut]
        right = counts - left
        n_left = cut + 1.0
        n_right = n - n_left
        child = (n_left * _entropy_from_counts(left) + n_right * _entropy_from_counts(right)) / n
        gains = parent - child
        i = int(np.argmax(gains))
        if gains[i] > 0 and (best is None or gains[i] > best[0]):
            best = (float(gains[i]), j, float(0.5 * (xs[cut[i]] + xs[cut[i] + 1])))
    return best


def _best_split_regression(X, Y, min_leaf):
    """Exhaustive scan by variance reduction (population variance)."""
    n, d = X.shape
    parent = float(np.mean((Y - Y.mean()) ** 2))
    best = None
    for j in range(d):
        order = np.argsort(X[:, j], kind="mergesort")
        xs = X[order, j]
        ys = Y[order]
        cum = np.cumsum(ys)
        cum2 = np.cumsum(ys**2)
        cut = np.flatnonzero(xs[:-1] < xs[1:])
        cut = cut[(cut + 1 >= min_leaf) & (n - cut - 1 >= min_leaf)]
        if len(cut) == 0:
            continue
        n_left = cut + 1.0
        n_right = n - n_left
        var_left = cum2[cut] / n_left - (cum[cut] / n_left) ** 2
        var_right = (cum2[-1] - cum2[cut]) / n_right - ((cum[-1] - cum[cut]) / n_right) ** 2
        child = (n_left * var_left + n_right * var_right) / n
        gains = parent - np.maximum(child, 0.0)
        i = int(np.argmax(gains))
        if gains[i] > 0 and (best is None or gains[i] > best[0]):
            best = (float(gains[i]), j, float(0.5 * (xs[cut[i]] + xs[cut[i] + 1])))
    return best


def build_cart(
    X: np.ndarray,
    Y: np.ndarray,
    task: str,
    max_depth: int,
    min_leaf: int = 1,
    n_classes: int = 0,
) -> CartTree:
    """Grow one axis-split tree; zero-gain or pure nodes become leaves."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] == 0:
        raise EmptyInputError("empty sample")
    classification = task == TASK_CLASSIFICATION
    Y = np.asarray(Y, dtype=np.int64 if classification else np.float64)

    def payload(ys):
        if classification:
            return leaf_label_classification(ys, n_classes)
        return leaf_label_regression(ys)

    def grow(Xn, Yn, depth) -> CartNode:
        node = CartNode(depth=depth)
        pure = len(np.unique(Yn)) <= 1
        if depth >= max_depth or pure or len(Yn) < 2 * min_leaf:
            node.payload = payload(Yn)
            return node
        if classification:
            split = _best_split_classification(Xn, Yn, n_classes, min_leaf)
        else:
            split = _best_split_regression(Xn, Yn, min_leaf)
        if split is None:
            node.payload = payload(Yn)
            return node
        _, j, thr = split
        mask = Xn[:, j] <= thr
        node.feature = j
        node.threshold = thr
        node.left = grow(Xn[mask], Yn[mask], depth + 1)
        node.right = grow(Xn[~mask], Yn[~mask], depth + 1)
        return node

    return CartTree(root=grow(X, Y, 0), max_depth=max_depth)


def cart_ensemble(
    ds: Dataset,
    n_trees: int,
    max_depth: int,
    seed: int,
    min_leaf: int = 1,
    draw_size: int | None = None,
) -> CartEnsemble:
    """Bagged axis-split trees on the same bootstrap protocol as the forest.

    Per-tree sample seeds are derived identically to the clustering
    forest's, so a shared master seed feeds both models the same rows.
    """
    draw = draw_size if draw_size is not None else ds.n
    trees, samples = [], []
    for i in range(n_trees):
        sample = bootstrap_sample(ds, draw, derive_seed(seed, "sample", i))
        trees.append(
            build_cart(
                ds.X[sample.indices],
                ds.y[sample.indices],
                ds.task,
                max_depth,
                min_leaf,
                ds.n_classes,
            )
        )
        samples.append(sample)
    return CartEnsemble(
        trees=trees,
        task=ds.task,
        classes=ds.classes,
        feature_names=ds.feature_names,
        sample_sets=samples,
        n_trees_config=n_trees,
        max_depth=max_depth,
        min_leaf=min_leaf,
        draw_size=draw_size,
        seed=seed,
    )
