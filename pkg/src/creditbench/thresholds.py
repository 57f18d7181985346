"""Score thresholding: cutoff calibration and label assignment.

Scores are probabilities of the positive ("good" / non-default) class.
A case is labelled good when its score is >= the threshold.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Threshold:
    tau: float

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError(f"threshold must lie in [0, 1], got {self.tau}")


def calibrate_threshold(scores: np.ndarray, train_good_rate: float) -> Threshold:
    """Pick the cutoff so the predicted-good share tracks the training good share.

    Among the observed scores, tau is the one whose >=-coverage is closest to
    ``train_good_rate``; ties go to the smallest such score (more goods).
    """
    scores = np.asarray(scores, dtype=float)
    if scores.size == 0:
        raise ValueError("cannot calibrate a threshold on an empty score vector")
    if not 0.0 < train_good_rate < 1.0:
        raise ValueError(f"train_good_rate must lie in (0, 1), got {train_good_rate}")
    candidates = np.unique(scores)  # ascending
    n = scores.size
    coverage = np.array([(scores >= c).sum() / n for c in candidates])
    deviation = np.abs(coverage - train_good_rate)
    best = deviation.min()
    # smallest score among the closest candidates
    tau = candidates[deviation <= best + 1e-15][0]
    return Threshold(tau=float(tau))


def predict_labels(scores: np.ndarray, threshold: Threshold) -> np.ndarray:
    """Good (0) iff score >= tau, else default (1)."""
    scores = np.asarray(scores, dtype=float)
    return np.where(scores >= threshold.tau, 0, 1).astype(np.int8)
