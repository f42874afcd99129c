"""Shared fixtures: benchmark datasets and small helpers.

The Wine data ships with scikit-learn, so it is always available. The
other benchmark CSVs (pima, german, spambase) must be fetched with
``scripts/fetch_data.py`` on a machine with network access and dropped
into ``data/``; tests that need them skip with a pointer when absent.
"""

import csv
import os

import numpy as np
import pytest

from clusterforest import Dataset

DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data")


def _require_csv(name: str):
    path = os.path.join(DATA_DIR, name)
    if not os.path.exists(path):
        pytest.skip(
            f"{name} not present under data/; run scripts/fetch_data.py on a "
            "machine with network access to enable this benchmark"
        )
    return path


@pytest.fixture(scope="session")
def wine_dataset() -> Dataset:
    from sklearn.datasets import load_wine

    raw = load_wine()
    classes = tuple(str(c) for c in raw.target_names)
    return Dataset(raw.data, raw.target, classes, tuple(raw.feature_names))


@pytest.fixture(scope="session")
def wine_csv_path(tmp_path_factory):
    from sklearn.datasets import load_wine

    raw = load_wine()
    path = tmp_path_factory.mktemp("data") / "wine.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([n.replace(",", "_") for n in raw.feature_names] + ["label"])
        for x, y in zip(raw.data, raw.target):
            writer.writerow([repr(float(v)) for v in x] + [str(raw.target_names[y])])
    return str(path)


@pytest.fixture(scope="session")
def pima_csv_path():
    return _require_csv("pima.csv")


@pytest.fixture(scope="session")
def german_csv_path():
    return _require_csv("german.csv")


@pytest.fixture(scope="session")
def spambase_csv_path():
    return _require_csv("spambase.csv")


def load_benchmark(path: str, categorical=()) -> Dataset:
    from clusterforest import load_csv, one_hot_encode

    ds = load_csv(path, "label", "classification", tuple(categorical))
    if categorical:
        ds = one_hot_encode(ds, categorical)
    return ds


@pytest.fixture
def rng_np():
    return np.random.default_rng(12345)
