"""Stratified fold assignment shared by tuning, ensemble weighting and stacking."""
from __future__ import annotations

import numpy as np


def stratified_folds(y: np.ndarray, n_folds: int, seed: int) -> np.ndarray:
    """Fold id per row; per-class fold sizes differ by at most one.

    If a fold would miss a class the assignment is redrawn once with a
    shifted seed, then reported as an error.
    """
    y = np.asarray(y)
    if n_folds < 2:
        raise ValueError("need at least 2 folds")
    for attempt in (0, 1):
        rng = np.random.default_rng(seed + attempt)
        fold = np.empty(len(y), dtype=np.int64)
        for label in np.unique(y):
            idx = rng.permutation(np.flatnonzero(y == label))
            fold[idx] = np.arange(idx.size) % n_folds
        ok = all(
            np.unique(y[fold == f]).size == np.unique(y).size for f in range(n_folds)
        )
        if ok:
            return fold
    raise ValueError(
        f"cannot stratify {n_folds} folds: a class has fewer members than folds"
    )
