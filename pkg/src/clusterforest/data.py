"""Dataset ingestion, encoding, normalization, folds, and stream plans.

A :class:`Dataset` is an immutable-by-convention pair of a float feature
matrix ``X`` and a label vector ``y``. Classification labels are stored as
integer indices into ``classes`` (first-appearance order); regression
datasets have an empty class catalog and float labels. All splitting
operations are pure functions of (inputs, seed) using the portable
generator from :mod:`clusterforest.rng`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ClassCatalogError,
    DataParseError,
    DataSchemaError,
    EmptyInputError,
    ShapeError,
    SplitError,
)
from .rng import Rng, derive_seed

TASK_CLASSIFICATION = "classification"
TASK_REGRESSION = "regression"


@dataclass
class Dataset:
    """Numeric feature matrix plus labels and column metadata.

    ``categories`` records, for columns that were ingested as categorical,
    the original category strings in first-appearance order; the column
    itself holds the matching integer codes as floats. Purely numeric
    columns have no entry.
    """

    X: np.ndarray
    y: np.ndarray
    classes: tuple[str, ...] = ()
    feature_names: tuple[str, ...] = ()
    categories: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        if self.X.ndim != 2:
            raise ShapeError("X must be a 2-D matrix")
        if self.n < 1 or self.d < 1:
            raise EmptyInputError("dataset needs at least one row and one column")
        if not np.all(np.isfinite(self.X)):
            raise DataParseError("X contains non-finite entries")
        if self.is_classification:
            self.y = np.asarray(self.y, dtype=np.int64)
            if self.y.size and (self.y.min() < 0 or self.y.max() >= len(self.classes)):
                raise ClassCatalogError(
                    f"labels must be indices in [0, {len(self.classes)}); saw range "
                    f"[{int(self.y.min())}, {int(self.y.max())}]"
                )
        else:
            self.y = np.asarray(self.y, dtype=np.float64)
        if len(self.y) != self.n:
            raise ShapeError("label vector length does not match row count")
        if not self.feature_names:
            self.feature_names = tuple(f"x{j}" for j in range(self.d))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def is_classification(self) -> bool:
        return len(self.classes) > 0

    @property
    def task(self) -> str:
        return TASK_CLASSIFICATION if self.is_classification else TASK_REGRESSION

    def subset(self, indices) -> "Dataset":
        """Dataset restricted to the given row indices (multiset allowed)."""
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            self.X[idx], self.y[idx], self.classes, self.feature_names, dict(self.categories)
        )


@dataclass
class NormParams:
    """Per-feature centering/scaling fitted on a training split.

    Zero-variance features keep ``std = 1`` and are flagged; applying the
    transform maps them to constant 0 so they carry no information (and
    downstream feature weights force them to 0 anyway).
    """

    mean: np.ndarray
    std: np.ndarray
    zero_variance: np.ndarray  # bool mask, length d


@dataclass
class SampleSet:
    """Multiset of row indices from a bootstrap draw."""

    indices: np.ndarray

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.indices)


@dataclass
class StreamPlan:
    """Disjoint assignment of rows to an initial set plus ordered batches."""

    initial_indices: np.ndarray
    batch_indices: list[np.ndarray]

    @property
    def initial_size(self) -> int:
        return len(self.initial_indices)

    @property
    def batch_sizes(self) -> list[int]:
        return [len(b) for b in self.batch_indices]


def load_csv(
    path,
    label_column: str | None,
    task: str = TASK_CLASSIFICATION,
    categorical: tuple[str, ...] = (),
) -> Dataset:
    """Load a headered, comma-separated UTF-8 file into a Dataset.

    Feature cells must parse as numbers unless their column is listed in
    ``categorical``, in which case values are mapped to integer codes in
    first-appearance order (kept in ``Dataset.categories`` for later
    one-hot encoding). Missing values are a hard error. With
    ``label_column=None`` every column is a feature and the labels are a
    zero placeholder (prediction-input files).
    """
    if task not in (TASK_CLASSIFICATION, TASK_REGRESSION):
        raise DataSchemaError(f"unknown task {task!r}")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyInputError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        if label_column is not None and label_column not in header:
            raise DataSchemaError(f"{path}: label column {label_column!r} not in header")
        unknown = set(categorical) - set(header)
        if unknown:
            raise DataSchemaError(f"{path}: categorical columns not in header: {sorted(unknown)}")
        label_pos = header.index(label_column) if label_column is not None else -1
        feature_names = tuple(h for i, h in enumerate(header) if i != label_pos)
        cat_set = set(categorical)

        rows: list[list[float]] = []
        labels: list[str] = []
        codes: dict[str, dict[str, int]] = {name: {} for name in feature_names if name in cat_set}
        for row_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and row[0].strip() == ""):
                continue
            if len(row) != len(header):
                raise DataParseError(f"{path}:{row_no}: expected {len(header)} cells, got {len(row)}")
            feats = []
            for i, cell in enumerate(row):
                cell = cell.strip()
                if i == label_pos:
                    labels.append(cell)
                    continue
                name = header[i]
                if cell == "":
                    raise DataParseError(f"{path}:{row_no}: missing value in column {name!r}")
                if name in cat_set:
                    table = codes[name]
                    if cell not in table:
                        table[cell] = len(table)
                    feats.append(float(table[cell]))
                else:
                    try:
                        feats.append(float(cell))
                    except ValueError:
                        raise DataParseError(
                            f"{path}:{row_no}: non-numeric value {cell!r} in column {name!r}"
                        ) from None
            rows.append(feats)

    if not rows:
        raise EmptyInputError(f"{path}: no data rows")
    X = np.array(rows, dtype=np.float64)

    if label_column is None:
        categories = {name: tuple(table.keys()) for name, table in codes.items() if table}
        return Dataset(X, np.zeros(len(rows)), (), feature_names, categories)
    if task == TASK_CLASSIFICATION:
        classes: list[str] = []
        index = {}
        for lab in labels:
            if lab not in index:
                index[lab] = len(index)
                classes.append(lab)
        y = np.array([index[lab] for lab in labels], dtype=np.int64)
        cls = tuple(classes)
    else:
        try:
            y = np.array([float(lab) for lab in labels], dtype=np.float64)
        except ValueError:
            raise DataParseError(f"{path}: non-numeric regression label") from None
        cls = ()
    categories = {name: tuple(table.keys()) for name, table in codes.items() if table}
    return Dataset(X, y, cls, feature_names, categories)


def one_hot_encode(ds: Dataset, categorical) -> Dataset:
    """Expand each named column into one indicator column per category.

    Categories are ordered by first appearance in the column (or by the
    ingestion-order strings recorded at load time). Row count and labels
    are untouched; expanded columns are named ``col=category``.
    """
    categorical = list(categorical)
    if not categorical:
        return ds
    unknown = [c for c in categorical if c not in ds.feature_names]
    if unknown:
        raise DataSchemaError(f"unknown columns: {unknown}")
    cat_set = set(categorical)

    new_cols: list[np.ndarray] = []
    new_names: list[str] = []
    for j, name in enumerate(ds.feature_names):
        col = ds.X[:, j]
        if name not in cat_set:
            new_cols.append(col)
            new_names.append(name)
            continue
        # distinct values in first-appearance order
        _, first_pos = np.unique(col, return_index=True)
        values = col[np.sort(first_pos)]
        labels = ds.categories.get(name)
        for v in values:
            new_cols.append((col == v).astype(np.float64))
            if labels is not None:
                new_names.append(f"{name}={labels[int(v)]}")
            else:
                new_names.append(f"{name}={v:g}")
    remaining = {k: v for k, v in ds.categories.items() if k not in cat_set}
    return Dataset(np.column_stack(new_cols), ds.y, ds.classes, tuple(new_names), remaining)


def normalize(ds: Dataset) -> tuple[Dataset, NormParams]:
    """Center each feature to mean 0 and scale to population stdev 1.

    Constant features are flagged and mapped to 0 instead of dividing by
    zero. Returns the transformed dataset and the fitted parameters, for
    applying the identical transform to held-out rows.
    """
    mean = ds.X.mean(axis=0)
    std = np.sqrt(np.mean((ds.X - mean) ** 2, axis=0))
    zero_var = std == 0.0
    std = np.where(zero_var, 1.0, std)
    params = NormParams(mean=mean, std=std, zero_variance=zero_var)
    return apply_norm(ds, params), params


def apply_norm(ds: Dataset, params: NormParams) -> Dataset:
    """Apply previously fitted normalization; flagged columns become 0."""
    if len(params.mean) != ds.d:
        raise ShapeError("normalization parameters fitted for a different width")
    X = (ds.X - params.mean) / params.std
    X[:, params.zero_variance] = 0.0
    return Dataset(X, ds.y, ds.classes, ds.feature_names, dict(ds.categories))


def fold_indices(n: int, test_ratio: float, n_folds: int, seed: int):
    """Seeded (train_indices, test_indices) pairs, one per fold."""
    if not 0.0 < test_ratio < 1.0:
        raise SplitError("test_ratio must be in (0, 1)")
    if n_folds < 1:
        raise SplitError("n_folds must be >= 1")
    n_test = int(round(n * test_ratio))
    if n_test < 1 or n - n_test < 1:
        raise SplitError(f"test_ratio {test_ratio} leaves an empty split for N={n}")
    pairs = []
    for f in range(n_folds):
        rng = Rng(derive_seed(seed, "fold", f))
        perm = rng.permutation(n)
        pairs.append((perm[n_test:], perm[:n_test]))
    return pairs


def make_folds(
    ds: Dataset,
    test_ratio: float,
    n_folds: int,
    seed: int,
    normalized: bool = True,
) -> list[tuple[Dataset, Dataset]]:
    """Create seeded random train/test splits (one per fold).

    Each fold draws its own permutation from a seed derived from
    ``(seed, fold)``; train and test are disjoint and together cover all
    rows. With ``normalized`` (the default), scaling is fitted on the
    train part and applied to both parts.
    """
    folds = []
    for train_idx, test_idx in fold_indices(ds.n, test_ratio, n_folds, seed):
        train = ds.subset(train_idx)
        test = ds.subset(test_idx)
        if normalized:
            train, params = normalize(train)
            test = apply_norm(test, params)
        folds.append((train, test))
    return folds


def bootstrap_sample(ds: Dataset, draw_size: int, seed: int) -> SampleSet:
    """Draw ``draw_size`` row indices uniformly with replacement."""
    if draw_size < 1:
        raise SplitError("draw_size must be >= 1")
    rng = Rng(seed)
    return SampleSet(rng.integers(0, ds.n, size=draw_size))


def stream_split(ds: Dataset, initial: int, batch_sizes, seed: int) -> StreamPlan:
    """Partition rows into an initial set plus ordered disjoint batches."""
    batch_sizes = list(batch_sizes)
    total = initial + sum(batch_sizes)
    if initial < 1 or any(b < 1 for b in batch_sizes):
        raise SplitError("initial and batch sizes must be >= 1")
    if total > ds.n:
        raise SplitError(f"plan needs {total} rows but dataset has {ds.n}")
    rng = Rng(seed)
    perm = rng.permutation(ds.n)
    plan_initial = perm[:initial]
    batches = []
    pos = initial
    for b in batch_sizes:
        batches.append(perm[pos : pos + b])
        pos += b
    return StreamPlan(initial_indices=plan_initial, batch_indices=batches)


def align_classes(ds: Dataset, classes: tuple[str, ...]) -> Dataset:
    """Re-index labels against a reference class catalog.

    Separately loaded files number classes by their own first-appearance
    order; this remaps onto the catalog a model was trained with. Labels
    outside the catalog are an error.
    """
    classes = tuple(classes)
    if not ds.is_classification:
        raise ClassCatalogError("dataset has no class labels to align")
    if ds.classes == classes:
        return ds
    mapping = {}
    for i, name in enumerate(ds.classes):
        if name not in classes:
            raise ClassCatalogError(f"label {name!r} not in the reference catalog {classes}")
        mapping[i] = classes.index(name)
    y = np.array([mapping[int(v)] for v in ds.y], dtype=np.int64)
    return Dataset(ds.X, y, classes, ds.feature_names, dict(ds.categories))


def concat_datasets(a: Dataset, b: Dataset) -> Dataset:
    """Stack two datasets with identical schema (column names and classes)."""
    if a.feature_names != b.feature_names:
        raise DataSchemaError("feature names differ between datasets")
    if a.classes != b.classes:
        raise DataSchemaError("class catalogs differ between datasets")
    return Dataset(
        np.vstack([a.X, b.X]),
        np.concatenate([a.y, b.y]),
        a.classes,
        a.feature_names,
        dict(a.categories),
    )
