"""Feature-relevance weights from incrementally updatable statistics.

Two relevance measures are supported:

* Pearson correlation (point-biserial for 0/1 labels) for regression and
  binary classification; the per-feature state is (count, means, cross
  sums, sums of squared deviations).
* The correlation ratio (eta squared) for multi-class classification:
  between-class sum of squares over total sum of squares, maintained from
  per-class counts and means.

Both states support an append-only update that consumes only the new rows,
so refreshing weights after a batch costs time proportional to the batch,
not to the accumulated history. The update and the from-scratch
computation agree to float roundoff; tests enforce 1e-9 relative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ClassCatalogError, InsufficientDataError, ShapeError


@dataclass
class FeatureWeights:
    """Per-feature relevance, raw and normalized to sum 1.

    ``uniform_fallback`` marks the degenerate case where every raw value
    was 0 (e.g. constant labels) and uniform weights 1/d were substituted.
    """

    raw: np.ndarray
    normalized: np.ndarray
    uniform_fallback: bool = False

    @property
    def d(self) -> int:
        return len(self.raw)


def uniform_weights(d: int) -> FeatureWeights:
    """Uniform weights 1/d: the unsupervised (plain Euclidean) setting."""
    w = np.full(d, 1.0 / d)
    return FeatureWeights(raw=np.ones(d), normalized=w, uniform_fallback=False)


def _normalize_raw(raw: np.ndarray) -> FeatureWeights:
    total = raw.sum()
    if total <= 0.0:
        d = len(raw)
        return FeatureWeights(raw=raw, normalized=np.full(d, 1.0 / d), uniform_fallback=True)
    return FeatureWeights(raw=raw, normalized=raw / total, uniform_fallback=False)


# ---------------------------------------------------------------------------
# Pearson correlation
# ---------------------------------------------------------------------------


@dataclass
class PearsonState:
    """Sufficient statistics for per-feature Pearson correlations.

    Holds exactly what the correlation needs: the sample count, feature
    and label means, per-feature cross sums sum_i x_ij * y_i, per-feature
    sums of squared deviations, and the label sum of squared deviations.
    Memory is O(d) regardless of how many rows were absorbed.
    """

    n: int
    mu_x: np.ndarray
    mu_y: float
    sum_xy: np.ndarray
    ss_x: np.ndarray
    ss_y: float

    def copy(self) -> "PearsonState":
        return PearsonState(
            self.n, self.mu_x.copy(), self.mu_y, self.sum_xy.copy(), self.ss_x.copy(), self.ss_y
        )


def pearson_stats(X: np.ndarray, Y: np.ndarray) -> PearsonState:
    """One pass over (X, Y) building the correlation statistics."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim != 2 or Y.ndim != 1 or len(Y) != X.shape[0]:
        raise ShapeError("X must be (n, d) and Y must be (n,)")
    n = X.shape[0]
    if n < 2:
        raise InsufficientDataError("need at least 2 samples for a correlation")
    mu_x = X.mean(axis=0)
    mu_y = float(Y.mean())
    return PearsonState(
        n=n,
        mu_x=mu_x,
        mu_y=mu_y,
        sum_xy=X.T @ Y,
        ss_x=((X - mu_x) ** 2).sum(axis=0),
        ss_y=float(((Y - mu_y) ** 2).sum()),
    )


def pearson_update(s: PearsonState, Xnew: np.ndarray, Ynew: np.ndarray) -> PearsonState:
    """Fold a new batch into the statistics without revisiting old rows.

    Means combine as count-weighted averages; cross sums are additive; the
    sums of squared deviations recenter through the raw second moment:
    ss_tot = ss_old + n_old * mu_old^2 + sum(new x^2) - n_tot * mu_tot^2.
    Cost is proportional to the batch size only.
    """
    Xnew = np.asarray(Xnew, dtype=np.float64).reshape(-1, len(s.mu_x))
    Ynew = np.asarray(Ynew, dtype=np.float64)
    n_new = Xnew.shape[0]
    if len(Ynew) != n_new:
        raise ShapeError("batch X and Y lengths differ")
    if n_new == 0:
        return s.copy()
    n_tot = s.n + n_new
    mu_x_tot = (s.n * s.mu_x + Xnew.sum(axis=0)) / n_tot
    mu_y_tot = (s.n * s.mu_y + Ynew.sum()) / n_tot
    ss_x_tot = s.ss_x + s.n * s.mu_x**2 + (Xnew**2).sum(axis=0) - n_tot * mu_x_tot**2
    ss_y_tot = s.ss_y + s.n * s.mu_y**2 + (Ynew**2).sum() - n_tot * mu_y_tot**2
    return PearsonState(
        n=n_tot,
        mu_x=mu_x_tot,
        mu_y=float(mu_y_tot),
        sum_xy=s.sum_xy + Xnew.T @ Ynew,
        ss_x=np.maximum(ss_x_tot, 0.0),
        ss_y=max(float(ss_y_tot), 0.0),
    )


def pearson_weights(s: PearsonState) -> FeatureWeights:
    """Weights = |r_j|, normalized to sum 1.

    The absolute value keeps the weighted metric nonnegative; features
    with zero variance (or a constant label vector) get raw weight 0, and
    the all-zero case falls back to uniform weights with a flag.
    """
    num = s.sum_xy - s.n * s.mu_x * s.mu_y
    r = np.zeros_like(s.mu_x)
    ok = (s.ss_x > 0.0) & (s.ss_y > 0.0)
    r[ok] = num[ok] / (np.sqrt(s.ss_x[ok]) * np.sqrt(s.ss_y))
    np.clip(r, -1.0, 1.0, out=r)
    return _normalize_raw(np.abs(r))


# ---------------------------------------------------------------------------
# Correlation ratio (eta squared)
# ---------------------------------------------------------------------------


@dataclass
class EtaState:
    """Sufficient statistics for per-feature correlation ratios.

    Tracks the global per-feature means and sums of squared deviations
    plus per-class counts and per-(feature, class) means; the
    between-class sum of squares is recomputed from those on demand.
    Memory is O(d * n_classes).
    """

    n: int
    mu_x: np.ndarray  # (d,)
    class_counts: np.ndarray  # (n_classes,)
    mu_xc: np.ndarray  # (d, n_classes); 0 where the class is empty
    ss_t: np.ndarray  # (d,)

    @property
    def n_classes(self) -> int:
        return len(self.class_counts)

    def ss_c(self) -> np.ndarray:
        """Between-class sum of squares per feature."""
        diff = self.mu_xc - self.mu_x[:, None]
        return (self.class_counts * diff**2).sum(axis=1)

    def copy(self) -> "EtaState":
        return EtaState(
            self.n, self.mu_x.copy(), self.class_counts.copy(), self.mu_xc.copy(), self.ss_t.copy()
        )


def _class_sums(X: np.ndarray, Y: np.ndarray, n_classes: int):
    counts = np.bincount(Y, minlength=n_classes).astype(np.float64)
    onehot = (Y[:, None] == np.arange(n_classes)[None, :]).astype(np.float64)
    return counts, X.T @ onehot  # (n_classes,), (d, n_classes)


def eta_stats(X: np.ndarray, Y: np.ndarray, n_classes: int) -> EtaState:
    """One pass over (X, class labels) building the eta statistics."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.int64)
    if X.ndim != 2 or Y.ndim != 1 or len(Y) != X.shape[0]:
        raise ShapeError("X must be (n, d) and Y must be (n,)")
    if X.shape[0] < 2:
        raise InsufficientDataError("need at least 2 samples")
    if Y.size and (Y.min() < 0 or Y.max() >= n_classes):
        raise ClassCatalogError(f"labels must lie in [0, {n_classes})")
    mu_x = X.mean(axis=0)
    counts, sums = _class_sums(X, Y, n_classes)
    with np.errstate(invalid="ignore"):
        mu_xc = np.where(counts > 0, sums / counts, 0.0)
    return EtaState(
        n=X.shape[0],
        mu_x=mu_x,
        class_counts=counts,
        mu_xc=mu_xc,
        ss_t=((X - mu_x) ** 2).sum(axis=0),
    )


def eta_update(s: EtaState, Xnew: np.ndarray, Ynew: np.ndarray) -> EtaState:
    """Fold a new batch into the eta statistics, touching only new rows.

    Per-class means combine count-weighted exactly like the global means;
    the total sum of squared deviations recenters through the raw second
    moment. Cost is proportional to batch size times the class count.
    """
    Xnew = np.asarray(Xnew, dtype=np.float64).reshape(-1, len(s.mu_x))
    Ynew = np.asarray(Ynew, dtype=np.int64)
    n_new = Xnew.shape[0]
    if len(Ynew) != n_new:
        raise ShapeError("batch X and Y lengths differ")
    if n_new == 0:
        return s.copy()
    if Ynew.min() < 0 or Ynew.max() >= s.n_classes:
        raise ClassCatalogError(f"labels must lie in [0, {s.n_classes})")
    n_tot = s.n + n_new
    mu_x_tot = (s.n * s.mu_x + Xnew.sum(axis=0)) / n_tot
    counts_new, sums_new = _class_sums(Xnew, Ynew, s.n_classes)
    counts_tot = s.class_counts + counts_new
    with np.errstate(invalid="ignore"):
        mu_xc_tot = np.where(
            counts_tot > 0, (s.class_counts * s.mu_xc + sums_new) / counts_tot, 0.0
        )
    ss_t_tot = s.ss_t + s.n * s.mu_x**2 + (Xnew**2).sum(axis=0) - n_tot * mu_x_tot**2
    return EtaState(
        n=n_tot,
        mu_x=mu_x_tot,
        class_counts=counts_tot,
        mu_xc=mu_xc_tot,
        ss_t=np.maximum(ss_t_tot, 0.0),
    )


def eta_weights(s: EtaState) -> FeatureWeights:
    """Weights = eta_j^2 = ss_c / ss_t in [0, 1], normalized to sum 1."""
    raw = np.zeros_like(s.mu_x)
    ok = s.ss_t > 0.0
    raw[ok] = s.ss_c()[ok] / s.ss_t[ok]
    np.clip(raw, 0.0, 1.0, out=raw)
    return _normalize_raw(raw)


def state_max_rel_error(a, b) -> float:
    """Largest per-field deviation between two states of the same kind.

    Per field the deviation is |a - b| / max(|a|, |b|, 1): relative for
    large magnitudes, absolute near zero. Used to check that incremental
    updates replay exactly against from-scratch recomputation.
    """
    if type(a) is not type(b):
        raise ShapeError("cannot compare states of different kinds")
    worst = 0.0
    for name in a.__dataclass_fields__:
        x = np.asarray(getattr(a, name), dtype=np.float64)
        y = np.asarray(getattr(b, name), dtype=np.float64)
        if x.shape != y.shape:
            raise ShapeError(f"field {name!r} has mismatched shapes")
        if x.size:
            denom = np.maximum(np.maximum(np.abs(x), np.abs(y)), 1.0)
            worst = max(worst, float(np.max(np.abs(x - y) / denom)))
    return worst
