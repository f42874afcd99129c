"""Traversal, ensemble aggregation, threshold tuning, and metrics.

Traversal descends from the root, at every internal node picking the child
whose centroid is nearest under the tree's training weights (ties to the
lowest child index). Batch prediction routes whole row blocks level by
level, which is what the experiment harnesses use.
"""

from __future__ import annotations

import numpy as np

from .data import Dataset, SampleSet
from .errors import EmptyInputError, ShapeError, UndefinedMetricError

AGG_MEAN = "mean"
AGG_MAJORITY = "majority"


def traverse(tree, x: np.ndarray):
    """Follow one sample to its leaf and return the leaf payload."""
    x = np.asarray(x, dtype=np.float64)
    node = tree.root
    w = getattr(tree, "weights", None)
    while not node.is_leaf:
        if hasattr(node, "threshold"):  # axis-split node
            node = node.left if x[node.feature] <= node.threshold else node.right
        else:
            if x.shape != node.centroid.shape:
                raise ShapeError("sample length does not match the tree")
            diff = node.child_centroids() - x
            node = node.children[int(np.argmin((diff * diff) @ w.normalized))]
    return node.payload


def _route_payloads(tree, X: np.ndarray, out: np.ndarray):
    """Vectorized traversal: fill out[i] with the leaf payload of row i."""
    w = getattr(tree, "weights", None)
    w = w.normalized if w is not None else None
    stack = [(tree.root, np.arange(X.shape[0]))]
    while stack:
        node, rows = stack.pop()
        if len(rows) == 0:
            continue
        if node.is_leaf:
            out[rows] = node.payload
            continue
        for child, sub in _node_children_rows(node, X[rows], w):
            stack.append((child, rows[sub]))


def predict(model, X: np.ndarray, aggregation: str = AGG_MEAN):
    """Aggregate the per-tree leaf payloads for one sample or a batch.

    Classification returns class-probability vectors: the across-tree mean
    of leaf probabilities (renormalized against float drift), or with
    ``majority`` each tree votes its argmax class and vote frequencies are
    returned. Regression returns the mean of the per-tree leaf means.
    """
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    n = X.shape[0]
    classification = model.task == "classification"

    if classification:
        total = np.zeros((n, model.n_classes))
        for tree in model.trees:
            probs = np.empty((n, model.n_classes))
            _route_payloads(tree, X, probs)
            if aggregation == AGG_MAJORITY:
                votes = np.zeros_like(probs)
                votes[np.arange(n), probs.argmax(axis=1)] = 1.0
                total += votes
            elif aggregation == AGG_MEAN:
                total += probs
            else:
                raise ShapeError(f"unknown aggregation {aggregation!r}")
        total /= len(model.trees)
        total /= total.sum(axis=1, keepdims=True)
        return total[0] if single else total

    out = np.zeros(n)
    for tree in model.trees:
        vals = np.empty(n)
        _route_payloads(tree, X, vals)
        out += vals
    out /= len(model.trees)
    return float(out[0]) if single else out


def tune_threshold(scores, labels, grid_step: float = 0.01) -> tuple[float, float]:
    """Scan thresholds over {0, step, ..., 1} for best binary accuracy.

    Predicts class 1 where score >= t. 0.5 is always a candidate, so the
    tuned accuracy can never fall below the untuned one; ties pick the
    smallest threshold.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.size == 0:
        raise EmptyInputError("no scores")
    steps = int(round(1.0 / grid_step))
    grid = sorted(set(np.linspace(0.0, 1.0, steps + 1)) | {0.5})
    best_t, best_acc = 0.0, -1.0
    for t in grid:
        acc = float(np.mean((scores >= t).astype(np.int64) == labels))
        if acc > best_acc:
            best_t, best_acc = float(t), acc
    return best_t, best_acc


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing their average rank."""
    order = np.argsort(values, kind="mergesort")
    sorted_vals = values[order]
    ranks = np.empty(len(values))
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def roc_auc(scores, labels) -> float:
    """Area under the ROC curve; ties count one half.

    For 1-D scores this is the rank statistic: the probability a random
    positive outscores a random negative. A 2-D score matrix is treated as
    multi-class one-vs-rest and macro-averaged over the classes that have
    both positives and negatives.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if scores.ndim == 2:
        per_class = []
        for c in range(scores.shape[1]):
            mask = labels == c
            if 0 < mask.sum() < len(labels):
                per_class.append(roc_auc(scores[:, c], mask.astype(np.int64)))
        if len(per_class) < 2:
            raise UndefinedMetricError("macro AUC needs at least two represented classes")
        return float(np.mean(per_class))
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC needs both classes present")
    ranks = _average_ranks(scores)
    return float((ranks[labels == 1].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def rmse(preds, labels) -> float:
    preds = np.asarray(preds, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if preds.size == 0:
        raise EmptyInputError("no predictions")
    if preds.shape != labels.shape:
        raise ShapeError("prediction and label lengths differ")
    return float(np.sqrt(np.mean((preds - labels) ** 2)))


def accuracy(scores, labels, threshold: float = 0.5) -> float:
    """Binary accuracy predicting class 1 where score >= threshold."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    return float(np.mean((scores >= threshold).astype(np.int64) == labels))


def entropy_bits(labels: np.ndarray, n_classes: int) -> float:
    """Shannon entropy of the label distribution, in bits."""
    counts = np.bincount(np.asarray(labels, dtype=np.int64), minlength=n_classes)
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log2(p)).sum())


def _node_children_rows(node, X, w):
    """Split rows among a node's children per the node's routing rule."""
    if hasattr(node, "threshold"):  # axis-split node
        mask = X[:, node.feature] <= node.threshold
        return [(node.left, np.flatnonzero(mask)), (node.right, np.flatnonzero(~mask))]
    diff = X[:, None, :] - node.child_centroids()[None, :, :]
    choice = np.argmin(np.einsum("nkd,d->nk", diff * diff, w), axis=1)
    return [(child, np.flatnonzero(choice == ci)) for ci, child in enumerate(node.children)]


def weighted_entropy_by_depth(tree, ds: Dataset, sample: SampleSet) -> np.ndarray:
    """Per-depth label impurity trace of one tree over its training rows.

    Depth t's value is the sum over nodes alive at depth t of (node row
    fraction) * (label entropy at the node); branches that terminate early
    keep contributing their leaf entropy at deeper levels, so fractions
    sum to 1 at every depth. Works for both centroid and axis-split trees.
    """
    if not ds.is_classification:
        raise UndefinedMetricError("entropy is defined for classification labels")
    X = ds.X[sample.indices]
    Y = ds.y[sample.indices]
    n_total = len(sample)
    depths = tree.max_depth
    sums = np.zeros(depths + 1)
    w = tree.weights.normalized if hasattr(tree, "weights") else None

    stack = [(tree.root, np.arange(n_total))]
    while stack:
        node, rows = stack.pop()
        if len(rows) == 0:
            continue
        h = entropy_bits(Y[rows], ds.n_classes) * len(rows)
        if node.is_leaf:
            sums[node.depth :] += h
            continue
        sums[node.depth] += h
        for child, sub in _node_children_rows(node, X[rows], w):
            stack.append((child, rows[sub]))
    return sums / n_total


def class_scores(model, X: np.ndarray, aggregation: str = AGG_MEAN) -> np.ndarray:
    """Probability matrix (n, n_classes) for a classification model."""
    probs = predict(model, np.atleast_2d(X), aggregation)
    return probs


def evaluate(model, test: Dataset, aggregation: str = AGG_MEAN, threshold: float = 0.5) -> dict:
    """Standard metric bundle for a model on a held-out split."""
    if test.is_classification:
        probs = class_scores(model, test.X, aggregation)
        if test.n_classes == 2:
            scores = probs[:, 1]
            return {
                "roc_auc": roc_auc(scores, test.y),
                "accuracy": accuracy(scores, test.y, threshold),
            }
        return {
            "roc_auc": roc_auc(probs, test.y),
            "accuracy": float(np.mean(probs.argmax(axis=1) == test.y)),
        }
    preds = predict(model, test.X)
    return {"rmse": rmse(preds, test.y)}
