import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import beta as beta_dist

from creditbench.metrics import (
    ConfusionMatrix,
    accuracy,
    auc,
    brier,
    cohen_kappa,
    evaluate_cell,
    h_measure,
    ks_statistic,
    read_predictions,
)
from creditbench.thresholds import calibrate_threshold, predict_labels


# ---------------------------------------------------------------------------
# independent oracles


def auc_pairwise_oracle(scores, labels):
    pos = scores[labels == 0]
    neg = scores[labels == 1]
    wins = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1.0
            elif p == q:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def ks_enumeration_oracle(scores, labels):
    pos = scores[labels == 0]
    neg = scores[labels == 1]
    best = 0.0
    for t in np.unique(scores):
        tpr = np.mean(pos >= t)
        fpr = np.mean(neg >= t)
        best = max(best, abs(tpr - fpr))
    return best


def h_measure_quadrature_oracle(scores, labels, a=2.0, b=2.0, grid=10_000):
    pos = scores[labels == 0]
    neg = scores[labels == 1]
    pi1 = len(pos) / len(scores)
    pi0 = 1.0 - pi1
    cuts = np.unique(scores)
    fprs = np.concatenate([[0.0, 1.0], [np.mean(neg >= t) for t in cuts]])
    tprs = np.concatenate([[0.0, 1.0], [np.mean(pos >= t) for t in cuts]])
    cs = (np.arange(grid) + 0.5) / grid
    w = beta_dist.pdf(cs, a, b) / grid
    losses = cs[:, None] * pi0 * fprs[None, :] + (1 - cs[:, None]) * pi1 * (1 - tprs[None, :])
    loss = float(np.sum(losses.min(axis=1) * w))
    loss_max = float(np.sum(np.minimum(cs * pi0, (1 - cs) * pi1) * w))
    return 1.0 - loss / loss_max


def random_cell(n, seed, round_to=None):
    rng = np.random.default_rng(seed)
    labels = (rng.random(n) < 0.4).astype(np.int8)
    if labels.min() == labels.max():
        labels[0] = 1 - labels[0]
    scores = np.clip(rng.normal(0.55 - 0.25 * labels, 0.2, n), 0.0, 1.0)
    if round_to is not None:
        scores = np.round(scores, round_to)
    return scores, labels


# ---------------------------------------------------------------------------
# confusion-based measures


def test_accuracy_examples():
    assert accuracy(ConfusionMatrix(tp=3, fn=1, fp=1, tn=5)) == pytest.approx(0.8)
    assert accuracy(ConfusionMatrix(tp=4, fn=0, fp=0, tn=6)) == 1.0
    assert accuracy(ConfusionMatrix(tp=0, fn=4, fp=6, tn=0)) == 0.0


def test_kappa_examples():
    assert cohen_kappa(ConfusionMatrix(tp=5, fn=0, fp=0, tn=5)) == 1.0
    # constant prediction of the majority class: agreement equals chance
    assert cohen_kappa(ConfusionMatrix(tp=7, fn=0, fp=3, tn=0)) == pytest.approx(0.0)
    assert cohen_kappa(ConfusionMatrix(tp=20, fn=5, fp=10, tn=15)) == pytest.approx(0.4)


def test_kappa_degenerate_marginals():
    assert cohen_kappa(ConfusionMatrix(tp=8, fn=0, fp=0, tn=0)) == 0.0


def test_confusion_from_labels():
    actual = np.array([0, 0, 1, 1, 0])
    predicted = np.array([0, 1, 1, 0, 0])
    cm = ConfusionMatrix.from_labels(actual, predicted)
    assert (cm.tp, cm.fn, cm.fp, cm.tn) == (2, 1, 1, 1)
    assert cm.total == 5


# ---------------------------------------------------------------------------
# score-based measures


def test_brier_examples():
    assert brier(np.array([1.0, 0.0]), np.array([0, 1])) == 0.0
    assert brier(np.full(8, 0.5), np.array([0, 1] * 4)) == pytest.approx(0.25)
    assert brier(np.array([0.8, 0.3]), np.array([0, 1])) == pytest.approx(0.065)


def test_auc_examples():
    assert auc(np.array([0.9, 0.8, 0.3, 0.1]), np.array([0, 0, 1, 1])) == 1.0
    assert auc(np.full(6, 0.7), np.array([0, 0, 0, 1, 1, 1])) == 0.5
    assert auc(np.array([0.9, 0.4, 0.6, 0.2]), np.array([0, 0, 1, 1])) == pytest.approx(0.75)


def test_ks_examples():
    assert ks_statistic(np.array([0.9, 0.7, 0.6, 0.1]), np.array([0, 0, 1, 1])) == 1.0
    assert ks_statistic(np.array([0.3, 0.6, 0.3, 0.6]), np.array([0, 0, 1, 1])) == 0.0
    assert ks_statistic(np.array([0.9, 0.5, 0.7, 0.1]), np.array([0, 0, 1, 1])) == pytest.approx(0.5)


def test_h_measure_boundaries():
    assert h_measure(np.array([0.9, 0.8, 0.2, 0.1]), np.array([0, 0, 1, 1])) == pytest.approx(1.0)
    assert h_measure(np.full(10, 0.4), np.array([0, 1] * 5)) == pytest.approx(0.0)


@pytest.mark.parametrize("seed", range(4))
def test_metric_oracle_equivalence_random_fixtures(seed):
    scores, labels = random_cell(200, seed, round_to=2)  # rounding forces ties
    assert auc(scores, labels) == pytest.approx(auc_pairwise_oracle(scores, labels), abs=1e-12)
    assert ks_statistic(scores, labels) == pytest.approx(ks_enumeration_oracle(scores, labels), abs=1e-12)
    assert h_measure(scores, labels) == pytest.approx(
        h_measure_quadrature_oracle(scores, labels), abs=1e-6
    )


def test_single_class_inputs_rejected():
    with pytest.raises(ValueError):
        auc(np.array([0.5, 0.6]), np.array([0, 0]))
    with pytest.raises(ValueError):
        ks_statistic(np.array([0.5, 0.6]), np.array([1, 1]))
    with pytest.raises(ValueError):
        h_measure(np.array([0.5, 0.6]), np.array([0, 0]))


# ---------------------------------------------------------------------------
# invariants


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_auc_ks_monotone_transform_invariance(seed):
    scores, labels = random_cell(60, seed)
    transformed = 1.0 / (1.0 + np.exp(-(3.0 * scores - 1.0)))  # strictly increasing
    assert auc(transformed, labels) == pytest.approx(auc(scores, labels), abs=1e-12)
    assert ks_statistic(transformed, labels) == pytest.approx(ks_statistic(scores, labels), abs=1e-12)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_auc_complement(seed):
    scores, labels = random_cell(80, seed, round_to=2)
    assert auc(scores, labels) + auc(1.0 - scores, labels) == pytest.approx(1.0, abs=1e-12)


def test_h_measure_duplication_invariance():
    scores, labels = random_cell(50, 3, round_to=2)
    doubled_s = np.concatenate([scores, scores])
    doubled_l = np.concatenate([labels, labels])
    assert h_measure(doubled_s, doubled_l) == pytest.approx(h_measure(scores, labels), abs=1e-12)


def test_brier_bounds():
    scores, labels = random_cell(100, 11)
    b = brier(scores, labels)
    outcome = (labels == 0).astype(float)
    assert 0.0 <= b <= float(np.max((scores - outcome) ** 2))


# ---------------------------------------------------------------------------
# threshold calibration


def test_calibrate_examples():
    tau = calibrate_threshold(np.array([0.9, 0.8, 0.3, 0.1]), 0.5)
    assert tau.tau == pytest.approx(0.8)
    labels = predict_labels(np.array([0.9, 0.8, 0.3, 0.1]), tau)
    assert (labels == 0).sum() == 2

    tau_hi = calibrate_threshold(np.array([0.9, 0.8, 0.3, 0.1]), 0.999)
    assert tau_hi.tau == pytest.approx(0.1)  # everything classified good


def test_calibrate_rejects_degenerate_rate():
    with pytest.raises(ValueError):
        calibrate_threshold(np.array([0.5]), 1.0)
    with pytest.raises(ValueError):
        calibrate_threshold(np.array([]), 0.5)


def test_calibrate_order_statistic_accuracy():
    rng = np.random.default_rng(0)
    scores = rng.random(1000)
    tau = calibrate_threshold(scores, 0.7)
    frac_good = float(np.mean(scores >= tau.tau))
    assert abs(frac_good - 0.7) <= 0.001


def test_predict_labels_boundaries():
    from creditbench.thresholds import Threshold

    scores = np.array([0.2, 0.5, 0.8])
    assert predict_labels(scores, Threshold(0.5)).tolist() == [1, 0, 0]  # score == tau is good
    assert predict_labels(scores, Threshold(0.9)).tolist() == [1, 1, 1]
    assert predict_labels(scores, Threshold(0.0)).tolist() == [0, 0, 0]


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_calibrated_labels_invariant_to_monotone_transform(seed):
    scores, _ = random_cell(70, seed, round_to=3)
    rate = 0.6
    labels_a = predict_labels(scores, calibrate_threshold(scores, rate))
    transformed = scores**3 + 2.0 * scores  # strictly increasing
    transformed = (transformed - transformed.min()) / (transformed.max() - transformed.min())
    labels_b = predict_labels(transformed, calibrate_threshold(transformed, rate))
    assert np.array_equal(labels_a, labels_b)


# ---------------------------------------------------------------------------
# composed evaluation


def test_evaluate_cell_perfect_classifier():
    scores = np.array([1.0, 1.0, 0.0, 0.0])
    labels = np.array([0, 0, 1, 1])
    ms, tau = evaluate_cell(scores, labels, train_good_rate=0.5)
    assert (ms.pcc, ms.kappa, ms.brier, ms.auc, ms.h_measure, ms.ks) == (1, 1, 0, 1, 1, 1)
    assert tau.tau == 1.0


def test_evaluate_cell_uninformative_scores():
    scores = np.full(10, 0.5)
    labels = np.array([0, 1] * 5)
    ms, _ = evaluate_cell(scores, labels, train_good_rate=0.5)
    assert ms.auc == 0.5
    assert ms.ks == 0.0
    assert ms.kappa == 0.0


def test_evaluate_cell_matches_individual_metrics():
    scores, labels = random_cell(150, 5, round_to=2)
    rate = 0.65
    ms, tau = evaluate_cell(scores, labels, rate)
    predicted = predict_labels(scores, tau)
    cm = ConfusionMatrix.from_labels(labels, predicted)
    assert ms.pcc == pytest.approx(accuracy(cm))
    assert ms.kappa == pytest.approx(cohen_kappa(cm))
    assert ms.brier == pytest.approx(brier(scores, labels))
    assert ms.auc == pytest.approx(auc(scores, labels))
    assert ms.h_measure == pytest.approx(h_measure(scores, labels))
    assert ms.ks == pytest.approx(ks_statistic(scores, labels))


def test_threshold_metrics_invariant_to_monotone_transform():
    scores, labels = random_cell(120, 9, round_to=3)
    rate = 0.6
    ms_a, _ = evaluate_cell(scores, labels, rate)
    transformed = np.sqrt(scores)
    ms_b, _ = evaluate_cell(transformed, labels, rate)
    assert ms_b.pcc == pytest.approx(ms_a.pcc)
    assert ms_b.kappa == pytest.approx(ms_a.kappa)


# ---------------------------------------------------------------------------
# prediction file format


def test_read_predictions_roundtrip(tmp_path):
    path = tmp_path / "preds.csv"
    path.write_text("row_id,score,label\nr1,0.9,0\nr2,0.4,1\nr3,0.55,0\n")
    ids, scores, labels = read_predictions(path)
    assert ids == ["r1", "r2", "r3"]
    assert scores.tolist() == [0.9, 0.4, 0.55]
    assert labels.tolist() == [0, 1, 0]


def test_read_predictions_rejects_bad_rows(tmp_path):
    path = tmp_path / "preds.csv"
    path.write_text("row_id,score,label\nr1,1.5,0\n")
    with pytest.raises(ValueError, match="score"):
        read_predictions(path)
    path.write_text("row_id,score,label\nr1,0.5,2\n")
    with pytest.raises(ValueError, match="label"):
        read_predictions(path)
    path.write_text("id,prob\nr1,0.5\n")
    with pytest.raises(ValueError, match="columns"):
        read_predictions(path)
