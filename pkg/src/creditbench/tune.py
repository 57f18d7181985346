"""Grid search with stratified 10-fold cross-validation inside the training set."""
from __future__ import annotations

import io
import itertools
from dataclasses import dataclass, field

import numpy as np

from .folds import stratified_folds
from .models import ModelSpec, fit
from .resample import ResampledSet


@dataclass(frozen=True)
class TuningGrid:
    family: str
    candidates: dict[str, list] = field(default_factory=dict)
    fold_count: int = 10
    selection_metric: str = "accuracy"  # accuracy | kappa

    def __post_init__(self):
        if self.fold_count < 2:
            raise ValueError("fold_count must be >= 2")
        if self.selection_metric not in ("accuracy", "kappa"):
            raise ValueError(f"unknown selection metric {self.selection_metric!r}")

    def expand(self) -> list[dict]:
        """Cartesian product in declared order; grid index is the tie-break."""
        if not self.candidates:
            return [{}]
        names = list(self.candidates)
        return [dict(zip(names, combo)) for combo in itertools.product(*self.candidates.values())]


@dataclass(frozen=True)
class CandidateResult:
    params: dict
    fold_metrics: tuple[float, ...]

    @property
    def mean_metric(self) -> float:
        return float(np.mean(self.fold_metrics))


def _fold_metric(pred_good: np.ndarray, actual_good: np.ndarray, metric: str) -> float:
    hit = pred_good == actual_good
    if metric == "accuracy":
        return float(hit.mean())
    # kappa from the 2x2 agreement table
    n = len(hit)
    p_a = hit.mean()
    p_good_pred = pred_good.mean()
    p_good_act = actual_good.mean()
    p_e = p_good_pred * p_good_act + (1 - p_good_pred) * (1 - p_good_act)
    if p_e >= 1.0:
        return 0.0
    return float((p_a - p_e) / (1 - p_e))


def cv_grid_search(
    grid: TuningGrid, train: ResampledSet, seed: int
) -> tuple[ModelSpec, list[CandidateResult]]:
    """Mean CV metric per candidate; winner is the highest mean, ties to the
    smaller grid index.  Class predictions inside CV use the 0.5 cutoff.

    Fold assignment and per-fold fit seeds depend only on (seed, fold), so
    duplicated candidates score identically.
    """
    y = np.asarray(train.target)
    fold = stratified_folds(y, grid.fold_count, seed)
    candidates = grid.expand()
    results: list[CandidateResult] = []
    fold_rows = [(fold != f, fold == f) for f in range(grid.fold_count)]
    for params in candidates:
        spec = ModelSpec(grid.family, params)
        metrics = []
        for f, (tr, te) in enumerate(fold_rows):
            sub = ResampledSet(train.features[tr], y[tr], train.provenance[tr])
            model = fit(spec, sub, seed=seed * 1009 + f)
            pred_good = model.score(train.features[te]) >= 0.5
            metrics.append(_fold_metric(pred_good, y[te] == 0, grid.selection_metric))
        results.append(CandidateResult(params, tuple(metrics)))
    best_idx = max(range(len(results)), key=lambda i: (results[i].mean_metric, -i))
    return ModelSpec(grid.family, candidates[best_idx]), results


def metric_table_csv(results: list[CandidateResult]) -> str:
    """Per-candidate audit table."""
    out = io.StringIO()
    names = sorted({k for r in results for k in r.params})
    n_folds = len(results[0].fold_metrics) if results else 0
    out.write(",".join(names + ["mean_metric"] + [f"fold_{i}" for i in range(n_folds)]) + "\n")
    for r in results:
        vals = [repr(r.params.get(k, "")) for k in names]
        out.write(",".join(vals + [f"{r.mean_metric:.6f}"] + [f"{m:.6f}" for m in r.fold_metrics]) + "\n")
    return out.getvalue()


def default_grid(family: str, n_features: int) -> TuningGrid:
    """Desk-scale default grids; singleton grids for untuned families."""
    d = max(1, n_features)
    if family == "knn":
        return TuningGrid(family, {"k": [5, 11, 21, 41]})
    if family == "cart":
        return TuningGrid(family, {"cp": [0.001, 0.005, 0.01, 0.05]})
    if family == "gaussian_nb":
        return TuningGrid(family, {"kernel": [False, True]})
    if family == "random_forest":
        mtry = sorted({max(1, int(round(np.sqrt(d)))), max(1, d // 3), max(1, d // 2)})
        return TuningGrid(family, {"mtry": mtry})
    if family == "adaboost":
        return TuningGrid(family, {"n_iter": [50, 100], "max_depth": [1, 2]})
    if family == "sgb":
        return TuningGrid(
            family,
            {"shrinkage": [0.01, 0.1], "interaction_depth": [1, 3], "n_trees": [100, 250]},
        )
    return TuningGrid(family, {})
