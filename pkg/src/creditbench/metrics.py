"""The six performance measures computed from scores and calibrated labels.

Conventions: the positive class is "good" (non-default, target 0) and scores
are probabilities of that class, so larger scores mean better customers.
PCC and Cohen's kappa are threshold-based; the Brier score, AUC, H-measure
and KS statistic read the raw score vector.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np
from scipy.special import betainc
from scipy.stats import rankdata

from .thresholds import Threshold, calibrate_threshold, predict_labels

METRIC_NAMES = ("pcc", "kappa", "brier", "auc", "h_measure", "ks")

#: metrics where a smaller value is better (everything else: larger is better)
LOWER_IS_BETTER = frozenset({"brier"})


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with "good" as the positive class: rows actual, columns predicted."""

    tp: int
    fn: int
    fp: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fn, self.fp, self.tn) < 0:
            raise ValueError("confusion matrix counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn

    @staticmethod
    def from_labels(actual: np.ndarray, predicted: np.ndarray) -> "ConfusionMatrix":
        actual = np.asarray(actual)
        predicted = np.asarray(predicted)
        if actual.shape != predicted.shape:
            raise ValueError("actual and predicted label vectors differ in length")
        good_a, good_p = actual == 0, predicted == 0
        return ConfusionMatrix(
            tp=int(np.sum(good_a & good_p)),
            fn=int(np.sum(good_a & ~good_p)),
            fp=int(np.sum(~good_a & good_p)),
            tn=int(np.sum(~good_a & ~good_p)),
        )


@dataclass(frozen=True)
class MetricSet:
    pcc: float
    kappa: float
    brier: float
    auc: float
    h_measure: float
    ks: float

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def accuracy(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    return (cm.tp + cm.tn) / cm.total


def cohen_kappa(cm: ConfusionMatrix) -> float:
    """Chance-corrected agreement; 0 when the chance agreement is degenerate."""
    n = cm.total
    if n == 0:
        raise ValueError("empty confusion matrix")
    p_a = (cm.tp + cm.tn) / n
    p_e = ((cm.tp + cm.fn) * (cm.tp + cm.fp) + (cm.fp + cm.tn) * (cm.fn + cm.tn)) / (n * n)
    if p_e >= 1.0:
        return 0.0
    return (p_a - p_e) / (1.0 - p_e)


def _split_scores(scores: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels differ in length")
    pos = scores[labels == 0]
    neg = scores[labels == 1]
    if pos.size == 0 or neg.size == 0:
        raise ValueError("both classes must be present to compute a ranking metric")
    return pos, neg


def brier(scores: np.ndarray, labels: np.ndarray) -> float:
    """Mean squared error of the good-probability against the 0/1 outcome."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels differ in length")
    if scores.size == 0:
        raise ValueError("empty score vector")
    outcome = (labels == 0).astype(float)
    return float(np.mean((scores - outcome) ** 2))


def auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Probability that a random good case outscores a random bad one, ties at 1/2.

    Computed from rank sums, which is exact for the pairwise-concordance
    definition including tied scores.
    """
    pos, neg = _split_scores(scores, labels)
    n_pos, n_neg = pos.size, neg.size
    ranks = rankdata(np.concatenate([pos, neg]))
    rank_sum = ranks[:n_pos].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def _roc_points(pos: np.ndarray, neg: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """ROC vertices (FPR, TPR) for descending score cutoffs, ties collapsed."""
    thresholds = np.unique(np.concatenate([pos, neg]))[::-1]
    tpr = np.searchsorted(np.sort(pos), thresholds, side="left")
    tpr = (pos.size - tpr) / pos.size
    fpr = np.searchsorted(np.sort(neg), thresholds, side="left")
    fpr = (neg.size - fpr) / neg.size
    fpr = np.concatenate([[0.0], fpr])
    tpr = np.concatenate([[0.0], tpr])
    return fpr, tpr


def ks_statistic(scores: np.ndarray, labels: np.ndarray) -> float:
    """Maximum gap between the class-conditional cumulative score distributions."""
    pos, neg = _split_scores(scores, labels)
    fpr, tpr = _roc_points(pos, neg)
    return float(np.max(np.abs(tpr - fpr)))


def _upper_convex_hull(fpr: np.ndarray, tpr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Upper concave envelope of ROC points, endpoints (0,0) and (1,1) kept."""
    pts = np.column_stack([fpr, tpr])
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
    hull: list[np.ndarray] = []
    for p in pts:
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # pop b unless the chain keeps turning right (concave from above)
            if (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= 0:
                hull.pop()
            else:
                break
        if hull and hull[-1][0] == p[0] and hull[-1][1] >= p[1]:
            continue
        hull.append(p)
    h = np.array(hull)
    return h[:, 0], h[:, 1]


def _beta_partial_moments(a: float, b: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(∫0^x u(c) dc, ∫0^x c·u(c) dc) for the Beta(a, b) cost density u."""
    x = np.clip(x, 0.0, 1.0)
    b0 = betainc(a, b, x)
    b1 = a / (a + b) * betainc(a + 1.0, b, x)
    return b0, b1


def h_measure(scores: np.ndarray, labels: np.ndarray, beta_a: float = 2.0, beta_b: float = 2.0) -> float:
    """Normalised expected minimum misclassification loss over a beta cost prior.

    The cost ratio c in [0, 1] weighs false positives (bad customers scored
    good) by c·pi0 and false negatives by (1-c)·pi1 and is integrated against
    a Beta(beta_a, beta_b) density.  The minimising ROC operating point is
    piecewise constant in c with switches on the ROC convex hull, so the
    integral is evaluated segment by segment with incomplete beta functions.
    Returns 1 - L/L_max where L_max is the loss of a score-free classifier.
    """
    pos, neg = _split_scores(scores, labels)
    n = pos.size + neg.size
    pi1, pi0 = pos.size / n, neg.size / n

    fpr, tpr = _roc_points(pos, neg)
    hf, ht = _upper_convex_hull(fpr, tpr)
    m = hf.size - 1  # hull segment count

    # cost where adjacent hull vertices tie: c = pi1*rho / (pi0 + pi1*rho)
    df = hf[1:] - hf[:-1]
    dt = ht[1:] - ht[:-1]
    rho = np.where(df > 0, dt / np.where(df > 0, df, 1.0), np.inf)
    switch = np.ones_like(rho)
    finite = np.isfinite(rho)
    switch[finite] = pi1 * rho[finite] / (pi0 + pi1 * rho[finite])

    # vertex i is optimal on [switch[i], switch[i-1]]; ends pinned to 0 and 1
    lo = np.concatenate([switch, [0.0]])
    hi = np.concatenate([[1.0], switch])

    b0_hi, b1_hi = _beta_partial_moments(beta_a, beta_b, hi)
    b0_lo, b1_lo = _beta_partial_moments(beta_a, beta_b, lo)
    w1 = np.maximum(b1_hi - b1_lo, 0.0)            # ∫ c u(c) over the vertex interval
    w0 = np.maximum((b0_hi - b0_lo) - w1, 0.0)     # ∫ (1-c) u(c)
    loss = float(np.sum(pi0 * hf[: m + 1] * w1 + pi1 * (1.0 - ht[: m + 1]) * w0))

    c_star = pi1
    b0_c, b1_c = _beta_partial_moments(beta_a, beta_b, np.array([c_star, 1.0]))
    loss_max = float(pi0 * b1_c[0] + pi1 * ((b0_c[1] - b0_c[0]) - (b1_c[1] - b1_c[0])))
    if loss_max <= 0.0:
        return 0.0
    return float(np.clip(1.0 - loss / loss_max, 0.0, 1.0))


def evaluate_cell(scores: np.ndarray, labels: np.ndarray, train_good_rate: float) -> tuple[MetricSet, Threshold]:
    """All six measures for one benchmark cell; the cutoff is calibrated once."""
    tau = calibrate_threshold(scores, train_good_rate)
    predicted = predict_labels(scores, tau)
    cm = ConfusionMatrix.from_labels(labels, predicted)
    return (
        MetricSet(
            pcc=accuracy(cm),
            kappa=cohen_kappa(cm),
            brier=brier(scores, labels),
            auc=auc(scores, labels),
            h_measure=h_measure(scores, labels),
            ks=ks_statistic(scores, labels),
        ),
        tau,
    )


def read_predictions(path: str | Path) -> tuple[list[str], np.ndarray, np.ndarray]:
    """Load a standalone prediction file: CSV with row_id, score, label columns.

    Labels use the target coding (1 = default, 0 = good).
    """
    ids: list[str] = []
    scores: list[float] = []
    labels: list[int] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"row_id", "score", "label"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError(f"prediction file needs columns {sorted(required)}")
        for lineno, row in enumerate(reader, start=2):
            ids.append(row["row_id"])
            score = float(row["score"])
            if not 0.0 <= score <= 1.0:
                raise ValueError(f"line {lineno}: score {score} outside [0, 1]")
            label = int(row["label"])
            if label not in (0, 1):
                raise ValueError(f"line {lineno}: label must be 0 or 1, got {row['label']}")
            scores.append(score)
            labels.append(label)
    return ids, np.array(scores, dtype=float), np.array(labels, dtype=np.int8)
