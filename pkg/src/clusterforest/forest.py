"""Tree and forest construction plus incremental retraining.

Each tree is grown by recursive weighted k-means: the rows reaching a node
are clustered into at most k groups, each group becomes a child anchored
at its cluster centroid, and recursion stops at the depth limit or when a
node runs out of distinct rows. Leaves carry class-probability vectors or
regression means.

A forest keeps, per tree, the bootstrap sample it was grown from and the
sufficient statistics behind its feature weights. Retraining with a new
batch draws a fresh sample from the batch only, folds it into the stored
statistics (cost proportional to the batch), and regrows each tree on the
union of old and new samples with the refreshed weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .clustering import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    NO_NOISE,
    NoiseConfig,
    supervised_kmeans,
)
from .data import Dataset, NormParams, SampleSet, bootstrap_sample, concat_datasets
from .errors import ConfigError, EmptyInputError, InsufficientPointsError
from .rng import Rng, derive_seed
from .weights import (
    EtaState,
    FeatureWeights,
    PearsonState,
    eta_stats,
    eta_update,
    eta_weights,
    pearson_stats,
    pearson_update,
    pearson_weights,
)

WEIGHT_PEARSON = "pearson"
WEIGHT_ETA = "eta"


@dataclass(eq=False)
class TreeNode:
    """One node: a routing centroid, children (empty for a leaf), payload."""

    centroid: np.ndarray
    depth: int
    children: list = field(default_factory=list)
    payload: object = None  # probability vector or float mean, leaves only
    _child_matrix: np.ndarray | None = field(default=None, repr=False)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def child_centroids(self) -> np.ndarray:
        if self._child_matrix is None:
            self._child_matrix = np.vstack([c.centroid for c in self.children])
        return self._child_matrix


@dataclass(eq=False)
class Tree:
    root: TreeNode
    weights: FeatureWeights
    k: int
    max_depth: int

    def leaves(self) -> list[TreeNode]:
        out, stack = [], [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                out.append(node)
            else:
                stack.extend(node.children)
        return out


@dataclass
class ForestConfig:
    """Build parameters; stored with the model so retraining can reuse them."""

    n_trees: int = 100
    k: int = 2
    max_depth: int = 2
    weight_method: str = WEIGHT_ETA
    draw_size: int | None = None  # default: dataset size
    draw_size_new: int | None = None  # default: batch size
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    seed: int = 0
    min_leaf: int = 1
    max_iter: int = DEFAULT_MAX_ITER
    tol: float = DEFAULT_TOL


@dataclass(eq=False)
class Forest:
    """T trees plus what retraining needs: samples and weight statistics."""

    trees: list[Tree]
    task: str
    classes: tuple[str, ...]
    feature_names: tuple[str, ...]
    sample_sets: list[SampleSet]
    weight_states: list
    config: ForestConfig
    norm: NormParams | None = None

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    @property
    def n_classes(self) -> int:
        return len(self.classes)


def leaf_label_regression(ys: np.ndarray) -> float:
    """Mean of the label values reaching the leaf."""
    ys = np.asarray(ys, dtype=np.float64)
    if ys.size == 0:
        raise EmptyInputError("leaf has no samples")
    return float(ys.mean())


def leaf_label_classification(
    ys: np.ndarray,
    n_classes: int,
    noise: NoiseConfig = NO_NOISE,
    seed: int = 0,
) -> np.ndarray:
    """Relative class occurrence at the leaf, optionally with count noise.

    With eps4 > 0 each class count picks up an independent additive error
    uniform in [-eps4, eps4] and is clamped at zero before renormalizing,
    emulating an approximate count estimate. If every perturbed count hits
    zero the exact proportions are kept.
    """
    ys = np.asarray(ys, dtype=np.int64)
    if ys.size == 0:
        raise EmptyInputError("leaf has no samples")
    counts = np.bincount(ys, minlength=n_classes).astype(np.float64)
    if noise.eps4 > 0.0:
        rng = Rng(seed)
        perturbed = counts + rng.uniform_array(-noise.eps4, noise.eps4, n_classes)
        perturbed = np.maximum(perturbed, 0.0)
        if perturbed.sum() > 0.0:
            return perturbed / perturbed.sum()
    return counts / counts.sum()


def build_tree(
    ds: Dataset,
    sample: SampleSet,
    weights: FeatureWeights,
    k: int,
    max_depth: int,
    noise: NoiseConfig = NO_NOISE,
    seed: int = 0,
    min_leaf: int = 1,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> Tree:
    """Grow one tree on the sampled rows by recursive weighted clustering.

    A node becomes a leaf at the depth limit, when it holds fewer than
    ``min_leaf`` rows or fewer than k distinct rows, or when clustering
    cannot produce at least two nonempty groups. Every stochastic step
    seeds its own stream from (seed, node path), so tree construction is
    order-independent and reproducible.
    """
    if len(sample) == 0:
        raise EmptyInputError("empty sample")
    X = ds.X[sample.indices]
    Y = ds.y[sample.indices]
    n_classes = ds.n_classes

    def make_payload(ys, path):
        if ds.is_classification:
            return leaf_label_classification(ys, n_classes, noise, derive_seed(seed, "leaf/" + path))
        return leaf_label_regression(ys)

    def grow(Xn, Yn, centroid, depth, path) -> TreeNode:
        node = TreeNode(centroid=centroid, depth=depth)
        must_stop = (
            depth >= max_depth
            or len(Xn) < min_leaf
            or len(np.unique(Xn, axis=0)) < k
        )
        if not must_stop:
            try:
                cents, assignment = supervised_kmeans(
                    Xn, weights, k, max_iter, tol, noise, derive_seed(seed, "node/" + path)
                )
            except InsufficientPointsError:
                must_stop = True
            else:
                groups = [np.flatnonzero(assignment == l) for l in range(k)]
                nonempty = [l for l in range(k) if len(groups[l])]
                if len(nonempty) < 2:
                    must_stop = True
                else:
                    for l in nonempty:
                        g = groups[l]
                        node.children.append(
                            grow(Xn[g], Yn[g], cents.vectors[l].copy(), depth + 1, f"{path}.{l}")
                        )
        if must_stop:
            node.payload = make_payload(Yn, path)
        return node

    root = grow(X, Y, X.mean(axis=0), 0, "0")
    return Tree(root=root, weights=weights, k=k, max_depth=max_depth)


def _fit_weight_state(config: ForestConfig, ds: Dataset, X, Y):
    if config.weight_method == WEIGHT_PEARSON:
        return pearson_stats(X, np.asarray(Y, dtype=np.float64))
    return eta_stats(X, Y, ds.n_classes)


def _weights_from_state(state) -> FeatureWeights:
    if isinstance(state, PearsonState):
        return pearson_weights(state)
    return eta_weights(state)


def _update_weight_state(state, X, Y):
    if isinstance(state, PearsonState):
        return pearson_update(state, X, np.asarray(Y, dtype=np.float64))
    return eta_update(state, X, Y)


def _validate_config(config: ForestConfig, ds: Dataset):
    if config.weight_method not in (WEIGHT_PEARSON, WEIGHT_ETA):
        raise ConfigError(f"unknown weight method {config.weight_method!r}")
    if config.weight_method == WEIGHT_PEARSON and ds.n_classes > 2:
        raise ConfigError("pearson weights require regression or binary labels")
    if config.weight_method == WEIGHT_ETA and not ds.is_classification:
        raise ConfigError("eta weights require class labels")
    if config.n_trees < 1 or config.k < 1 or config.max_depth < 0:
        raise ConfigError("n_trees >= 1, k >= 1 and max_depth >= 0 required")


def build_forest(ds: Dataset, config: ForestConfig, norm: NormParams | None = None) -> Forest:
    """Grow the ensemble: bootstrap, per-sample weights, one tree per draw.

    Sampling and tree growth use separate streams derived from
    (seed, "sample", i) and (seed, "tree", i), so a retrain that adds
    nothing reproduces the original trees bit for bit.
    """
    _validate_config(config, ds)
    draw = config.draw_size if config.draw_size is not None else ds.n
    trees, samples, states = [], [], []
    for i in range(config.n_trees):
        sample = bootstrap_sample(ds, draw, derive_seed(config.seed, "sample", i))
        Xs, Ys = ds.X[sample.indices], ds.y[sample.indices]
        state = _fit_weight_state(config, ds, Xs, Ys)
        w = _weights_from_state(state)
        tree = build_tree(
            ds,
            sample,
            w,
            config.k,
            config.max_depth,
            config.noise,
            derive_seed(config.seed, "tree", i),
            config.min_leaf,
            config.max_iter,
            config.tol,
        )
        trees.append(tree)
        samples.append(sample)
        states.append(state)
    return Forest(
        trees=trees,
        task=ds.task,
        classes=ds.classes,
        feature_names=ds.feature_names,
        sample_sets=samples,
        weight_states=states,
        config=replace(config),
        norm=norm,
    )


def retrain_forest(
    forest: Forest,
    ds_old: Dataset,
    ds_new: Dataset | None,
    config: ForestConfig | None = None,
    seed: int | None = None,
) -> Forest:
    """Fold a new batch into the forest without revisiting old rows for weights.

    ``ds_old`` must be the accumulated dataset the stored sample indices
    refer to. Per tree: a bootstrap draw from the batch alone updates the
    stored weight statistics, then the tree is regrown from the root on
    the union of its old sample and the new draw. With an empty batch and
    the same seed the result is identical to the input forest.
    """
    config = replace(config) if config is not None else replace(forest.config)
    seed = config.seed if seed is None else seed
    if forest.feature_names != ds_old.feature_names:
        raise ConfigError("model was trained on a different schema")
    n_new = 0 if ds_new is None else ds_new.n
    if n_new > 0:
        if ds_new.feature_names != ds_old.feature_names or ds_new.classes != ds_old.classes:
            raise ConfigError("new batch schema does not match the accumulated data")
        ds_all = concat_datasets(ds_old, ds_new)
    else:
        ds_all = ds_old
    draw_new = config.draw_size_new if config.draw_size_new is not None else n_new

    trees, samples, states = [], [], []
    for i in range(forest.n_trees):
        old_sample = forest.sample_sets[i]
        state = forest.weight_states[i]
        if n_new > 0 and draw_new > 0:
            new_local = bootstrap_sample(ds_new, draw_new, derive_seed(seed, "sample", i)).indices
            state = _update_weight_state(state, ds_new.X[new_local], ds_new.y[new_local])
            union = SampleSet(np.concatenate([old_sample.indices, new_local + ds_old.n]))
        else:
            state = state.copy()
            union = SampleSet(old_sample.indices.copy())
        w = _weights_from_state(state)
        tree = build_tree(
            ds_all,
            union,
            w,
            config.k,
            config.max_depth,
            config.noise,
            derive_seed(seed, "tree", i),
            config.min_leaf,
            config.max_iter,
            config.tol,
        )
        trees.append(tree)
        samples.append(union)
        states.append(state)
    return Forest(
        trees=trees,
        task=forest.task,
        classes=forest.classes,
        feature_names=forest.feature_names,
        sample_sets=samples,
        weight_states=states,
        config=config,
        norm=forest.norm,
    )
