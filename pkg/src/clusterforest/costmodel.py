"""Leading-order operation-count estimates for build, retrain, and inference.

These are symbolic calculators, not wall-time predictions: every big-O
constant is 1 and every ``log`` is base-2 and floored at 1 so estimates
stay positive and monotone in each size parameter. The poly-log factor
over the table size N*d is instantiated as log2(N*d)^2.
"""

from __future__ import annotations

import math

from .data import Dataset
from .errors import ConfigError


def _flog2(x: float) -> float:
    """log2 floored at 1 (keeps factors positive for tiny arguments)."""
    return max(1.0, math.log2(x)) if x > 0 else 1.0


def eval_cost(k: int, depth: int, d: int) -> int:
    """Single-sample, single-tree inference cost: k * depth * d."""
    if k < 1 or depth < 1 or d < 1:
        raise ConfigError("eval_cost needs positive k, depth, d")
    return k * depth * d


def kp_load_cost(n: int, d: int) -> float:
    """Cost of building the amplitude-access store: n*d*log2(n*d)^2."""
    if n < 0 or d < 0:
        raise ConfigError("sizes must be nonnegative")
    if n * d == 0:
        return 0.0
    return n * d * _flog2(n * d) ** 2


def clustering_cost(
    n: int,
    d: int,
    k: int,
    n_iter: int,
    depth: int,
    eps1: float,
    eps2: float,
    delta: float,
    p: int,
    eta1: float,
    eta2: float,
) -> float:
    """Depth-``depth`` clustering estimate.

    log2(n*d)^2 * n_iter * depth * k^(3*depth) * d * log2(k)^2 * log2(p)^2
    * log2(1/delta)^2 * eta1^2 * eta2 / (eps1^2 * eps2), with each log
    floored at 1.
    """
    if min(n, d, k, n_iter, depth, p) < 1:
        raise ConfigError("size parameters must be >= 1")
    if min(eps1, eps2, delta) <= 0:
        raise ConfigError("eps1, eps2 and delta must be positive")
    return (
        _flog2(n * d) ** 2
        * n_iter
        * depth
        * float(k) ** (3 * depth)
        * d
        * _flog2(k) ** 2
        * _flog2(p) ** 2
        * _flog2(1.0 / delta) ** 2
        * eta1**2
        * eta2
        / (eps1**2 * eps2)
    )


def leaf_label_cost(
    n: int,
    d: int,
    k: int,
    depth: int,
    n_classes: int,
    eps1: float,
    eps3: float,
    delta: float,
    p: int,
    eta1: float,
    eta3: float,
) -> float:
    """Leaf payload extraction estimate.

    The regression core is depth * k^(3*depth) * d * log2(k) * log2(p) *
    log2(1/delta) * eta1 * eta3 / (eps1 * eps3) under the poly-log table
    factor; classification multiplies in n_classes * log2(n * log2
    n_classes) * log2(n_classes), the per-class occurrence-count overhead
    with cluster size taken as n.
    """
    if min(n, d, k, depth, p) < 1:
        raise ConfigError("size parameters must be >= 1")
    if min(eps1, eps3, delta) <= 0:
        raise ConfigError("eps1, eps3 and delta must be positive")
    core = (
        _flog2(n * d) ** 2
        * depth
        * float(k) ** (3 * depth)
        * d
        * _flog2(k)
        * _flog2(p)
        * _flog2(1.0 / delta)
        * eta1
        * eta3
        / (eps1 * eps3)
    )
    if n_classes >= 2:
        core *= n_classes * _flog2(n * _flog2(n_classes)) * _flog2(n_classes)
    return core


def weights_update_cost(n_new: int, d: int, n_classes: int, method: str) -> float:
    """Batch-only weight refresh: n_new*d for pearson, n_new*d*classes for eta."""
    if method == "pearson":
        return float(n_new * d)
    if method == "eta":
        return float(n_new * d * max(n_classes, 1))
    raise ConfigError(f"unknown weight method {method!r}")


def retrain_cost_breakdown(
    n: int,
    n_new: int,
    d: int,
    k: int,
    n_iter: int,
    depth: int,
    n_classes: int = 2,
    weight_method: str = "eta",
    eps1: float = 0.1,
    eps2: float = 0.1,
    eps3: float = 0.1,
    delta: float = 0.1,
    p: int = 16,
    eta1: float = 1.0,
    eta2: float = 1.0,
    eta3: float = 1.0,
) -> dict:
    """Per-tree component estimates of one incremental retrain.

    Returns load_new (store update for the batch), weights_update
    (batch-only statistics refresh), clustering (tree regrowth), and
    leaf_label (payload extraction). Totals scale linearly with the number
    of trees.
    """
    n_total = n + n_new
    return {
        "load_new": kp_load_cost(n_new, d),
        "weights_update": weights_update_cost(n_new, d, n_classes, weight_method)
        if n_new > 0
        else 0.0,
        "clustering": clustering_cost(n_total, d, k, n_iter, depth, eps1, eps2, delta, p, eta1, eta2),
        "leaf_label": leaf_label_cost(
            n_total, d, k, depth, n_classes, eps1, eps3, delta, p, eta1, eta3
        ),
    }


def measure_norms(ds: Dataset) -> dict:
    """Data-dependent norm maxima used by the estimates, measured directly.

    eta1 = max squared row norm, eta2 = max column norm, eta3 = label
    vector norm.
    """
    import numpy as np

    return {
        "eta1": float((ds.X**2).sum(axis=1).max()),
        "eta2": float(np.sqrt((ds.X**2).sum(axis=0)).max()),
        "eta3": float(np.sqrt((np.asarray(ds.y, dtype=np.float64) ** 2).sum())),
    }
