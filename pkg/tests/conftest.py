import csv
from pathlib import Path

import numpy as np
import pytest

from creditbench.resample import PROV_ORIGINAL, ResampledSet

FIXTURE_DIR = Path(__file__).parent / "data" / "benchmark_tables"

CLASSIFIERS = [
    "LDA", "QDA", "FDA", "LogReg", "SVM-L", "SVM-R", "KNN", "ANN", "CART", "NB",
    "Bag-CT", "Boost-CT", "AdaBoost", "SGB", "RF", "parRF", "rotRF", "avNNet",
    "Logit-Boost", "bagFDA", "AvgS", "AvgW", "Stack",
]
SCENARIOS = ["original", "down", "up", "smote", "rose", "bsmote"]
DATASETS = ["GC", "AC", "TC", "GMSC"]
TABLE_METRICS = ["accuracy", "kappa", "brier", "auc", "h_measure", "ks"]


def load_benchmark_table(metric: str) -> np.ndarray:
    """23 x 24 value matrix (classifiers x scenario:dataset columns)."""
    with open(FIXTURE_DIR / f"{metric}.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0][1:], rows[1:]
    assert [r[0] for r in body] == CLASSIFIERS
    expected_cols = [f"{s}:{d}" for s in SCENARIOS for d in DATASETS]
    assert header == expected_cols
    return np.array([[float(v) for v in r[1:]] for r in body])


def scenario_slice(matrix: np.ndarray, scenario: str) -> np.ndarray:
    """23 x 4 block for one sampling scenario."""
    start = SCENARIOS.index(scenario) * len(DATASETS)
    return matrix[:, start:start + len(DATASETS)]


@pytest.fixture(scope="session")
def benchmark_tables() -> dict[str, np.ndarray]:
    return {m: load_benchmark_table(m) for m in TABLE_METRICS}


def make_blobs(n=200, d=4, sep=3.0, default_rate=0.5, seed=0):
    """Two Gaussian blobs; label 1 (default) sits at the negative blob."""
    rng = np.random.default_rng(seed)
    n_bad = int(round(n * default_rate))
    n_good = n - n_bad
    X = np.vstack([
        rng.normal(+sep / 2.0, 1.0, (n_good, d)),
        rng.normal(-sep / 2.0, 1.0, (n_bad, d)),
    ])
    y = np.concatenate([np.zeros(n_good, dtype=np.int8), np.ones(n_bad, dtype=np.int8)])
    perm = rng.permutation(n)
    return X[perm], y[perm]


def as_resampled(X, y) -> ResampledSet:
    return ResampledSet(
        features=np.asarray(X, dtype=float),
        target=np.asarray(y, dtype=np.int8),
        provenance=np.full(len(y), PROV_ORIGINAL, dtype=object),
    )


@pytest.fixture()
def blob_train():
    X, y = make_blobs(n=200, d=4, sep=3.0, seed=42)
    return as_resampled(X, y)


@pytest.fixture()
def noisy_train():
    # heavy class overlap so iterative fits converge well inside their caps
    X, y = make_blobs(n=300, d=4, sep=1.2, default_rate=0.4, seed=7)
    return as_resampled(X, y)
