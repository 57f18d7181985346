"""Preprocessing chain: dummy encoding, near-zero-variance filtering,
correlation filtering, train-fitted min-max scaling and KNN imputation.

Stage order is fixed: encode -> NZV filter -> correlation filter -> scaling
-> imputation.  Everything is fitted on training rows only; applying a
fitted plan to test rows uses exclusively that train-fitted state.
"""
from __future__ import annotations

import io
import warnings
from dataclasses import dataclass, field

import numpy as np

from .data import ColumnSchema, TabularDataset

NZV_FREQ_RATIO_CUT = 19.0   # most-common / second-most-common frequency
NZV_UNIQUE_PCT_CUT = 10.0   # distinct values as a percentage of rows
CORRELATION_THRESHOLD = 0.9
IMPUTATION_K = 5


def _column_values(data: TabularDataset, name: str) -> np.ndarray:
    col = data.columns[name]
    mask = data.missing_mask(name)
    return col[~mask]


def _rebuild(data: TabularDataset, schema: list[ColumnSchema], columns: dict[str, np.ndarray]) -> TabularDataset:
    return TabularDataset(
        schema=tuple(schema + [data.target_schema]),
        columns=columns,
        target=data.target,
    )


def observed_levels(data: TabularDataset, name: str) -> tuple[str, ...]:
    return tuple(sorted(set(_column_values(data, name).tolist())))


def encode_dummies(
    data: TabularDataset,
    levels: dict[str, tuple[str, ...]] | None = None,
) -> tuple[TabularDataset, dict[str, tuple[str, ...]]]:
    """Replace each categorical column having L levels by L-1 binary columns.

    The lexicographically smallest level is the omitted base category, so a
    base-level row is all zeros.  ``levels`` pins the level sets (train-fitted
    state); unseen values at apply time fall back to the base with a warning.
    Missing categorical cells stay missing across the derived columns.
    """
    levels = dict(levels) if levels is not None else {}
    schema: list[ColumnSchema] = []
    columns: dict[str, np.ndarray] = {}
    for col in data.predictor_schema:
        if col.kind == "numeric":
            schema.append(col)
            columns[col.name] = data.columns[col.name]
            continue
        if col.name not in levels:
            levels[col.name] = observed_levels(data, col.name)
        lvls = levels[col.name]
        if len(lvls) < 2:
            raise ValueError(
                f"categorical column {col.name!r} has a single observed level; "
                "run the near-zero-variance filter first"
            )
        raw = data.columns[col.name]
        missing = data.missing_mask(col.name)
        known = set(lvls)
        unseen = {v for v, m in zip(raw, missing) if not m and v not in known}
        if unseen:
            warnings.warn(
                f"column {col.name!r}: unseen level(s) {sorted(unseen)} mapped to base category",
                stacklevel=2,
            )
        for level in lvls[1:]:  # lvls[0] is the omitted base
            name = f"{col.name}={level}"
            vals = np.where(missing, np.nan, (raw == level).astype(float))
            schema.append(ColumnSchema(name=name, kind="numeric"))
            columns[name] = vals.astype(float)
    return _rebuild(data, schema, columns), levels


def near_zero_variance(values: np.ndarray, freq_ratio_cut: float, unique_pct_cut: float, n_rows: int) -> bool:
    """True when a column is (near) constant by the frequency-ratio rule."""
    uniq, counts = np.unique(values, return_counts=True)
    if uniq.size <= 1:
        return True
    counts = np.sort(counts)[::-1]
    freq_ratio = counts[0] / counts[1]
    unique_pct = 100.0 * uniq.size / n_rows
    return freq_ratio > freq_ratio_cut and unique_pct < unique_pct_cut


def filter_near_zero_variance(
    data: TabularDataset,
    freq_ratio_cut: float = NZV_FREQ_RATIO_CUT,
    unique_pct_cut: float = NZV_UNIQUE_PCT_CUT,
) -> tuple[TabularDataset, list[str]]:
    removed: list[str] = []
    schema: list[ColumnSchema] = []
    columns: dict[str, np.ndarray] = {}
    for col in data.predictor_schema:
        vals = _column_values(data, col.name)
        if near_zero_variance(vals, freq_ratio_cut, unique_pct_cut, data.n_rows):
            removed.append(col.name)
        else:
            schema.append(col)
            columns[col.name] = data.columns[col.name]
    if not schema:
        raise ValueError("near-zero-variance filter removed every predictor")
    return _rebuild(data, schema, columns), removed


def filter_correlated(
    data: TabularDataset, threshold: float = CORRELATION_THRESHOLD
) -> tuple[TabularDataset, list[str]]:
    """Drop columns until no pair of predictors has |Pearson r| > threshold.

    Each round removes, from the currently worst pair, the column with the
    larger mean absolute correlation to all other columns.  Correlations are
    computed once, on complete cases.
    """
    names = list(data.predictor_names)
    if any(c.kind != "numeric" for c in data.predictor_schema):
        raise ValueError("correlation filter requires all-numeric predictors")
    X = np.column_stack([data.columns[n] for n in names]).astype(float)
    complete = ~np.isnan(X).any(axis=1)
    if complete.sum() < 3:
        raise ValueError("not enough complete rows to estimate correlations")
    Xc = X[complete]
    if np.any(Xc.std(axis=0) == 0):
        bad = names[int(np.flatnonzero(Xc.std(axis=0) == 0)[0])]
        raise ValueError(
            f"column {bad!r} has zero variance on complete cases; "
            "run the near-zero-variance filter first"
        )
    corr = np.abs(np.corrcoef(Xc, rowvar=False))
    np.fill_diagonal(corr, 0.0)

    alive = list(range(len(names)))
    removed: list[str] = []
    while len(alive) > 1:
        sub = corr[np.ix_(alive, alive)]
        worst = np.unravel_index(np.argmax(sub), sub.shape)  # first max in row order
        if sub[worst] <= threshold:
            break
        a, b = alive[worst[0]], alive[worst[1]]
        mean_a = sub[worst[0]].sum() / (len(alive) - 1)
        mean_b = sub[worst[1]].sum() / (len(alive) - 1)
        drop = a if mean_a > mean_b or (mean_a == mean_b and a > b) else b
        removed.append(names[drop])
        alive.remove(drop)

    keep = set(alive)
    schema = [c for i, c in enumerate(data.predictor_schema) if i in keep]
    columns = {c.name: data.columns[c.name] for c in schema}
    return _rebuild(data, schema, columns), removed


def fit_scaling(data: TabularDataset) -> dict[str, tuple[float, float]]:
    """Per-column (min, max) learned on the given (training) rows."""
    bounds: dict[str, tuple[float, float]] = {}
    for name in data.predictor_names:
        vals = _column_values(data, name).astype(float)
        if vals.size == 0:
            raise ValueError(f"column {name!r} has no observed values to scale")
        bounds[name] = (float(vals.min()), float(vals.max()))
    return bounds


def apply_scaling(bounds: dict[str, tuple[float, float]], data: TabularDataset) -> TabularDataset:
    """Affine map to [0, 1] on train bounds; out-of-range values extrapolate.

    A column constant on train maps to 0 everywhere.
    """
    columns: dict[str, np.ndarray] = {}
    for name in data.predictor_names:
        lo, hi = bounds[name]
        col = data.columns[name].astype(float)
        if hi == lo:
            columns[name] = np.where(np.isnan(col), np.nan, 0.0)
        else:
            columns[name] = (col - lo) / (hi - lo)
    return _rebuild(data, list(data.predictor_schema), columns)


def impute_knn(X: np.ndarray, k: int = IMPUTATION_K, donors: np.ndarray | None = None) -> np.ndarray:
    """Fill missing cells with the mean over the k nearest complete donor rows.

    Distances are Euclidean over the columns observed in the incomplete row,
    rescaled by d / |observed| so rows with different missingness patterns
    stay comparable.  Donor ties break on the lower row index.
    """
    X = np.asarray(X, dtype=float)
    out = X.copy()
    donors = X if donors is None else np.asarray(donors, dtype=float)
    complete = ~np.isnan(donors).any(axis=1)
    pool = donors[complete]
    if pool.shape[0] == 0:
        raise ValueError("KNN imputation needs at least one complete donor row")
    if pool.shape[0] < k:
        warnings.warn(
            f"only {pool.shape[0]} complete donor rows available, using all of them",
            stacklevel=2,
        )
    d = X.shape[1]
    for i in np.flatnonzero(np.isnan(X).any(axis=1)):
        row = X[i]
        obs = ~np.isnan(row)
        if not obs.any():
            warnings.warn(f"row {i} has no observed predictors; using donor column means", stacklevel=2)
            out[i] = pool.mean(axis=0)
            continue
        diff = pool[:, obs] - row[obs]
        dist = np.sqrt((d / obs.sum()) * np.sum(diff * diff, axis=1))
        take = min(k, pool.shape[0])
        nearest = np.lexsort((np.arange(pool.shape[0]), dist))[:take]
        out[i, ~obs] = pool[nearest][:, ~obs].mean(axis=0)
    return out


@dataclass(frozen=True)
class PreprocessPlan:
    """Train-fitted preprocessing state, reusable on any test slice."""

    categorical_levels: dict[str, tuple[str, ...]]
    dropped_base_categories: dict[str, str]
    removed_columns: tuple[tuple[str, str], ...]  # (name, reason)
    scaling_bounds: dict[str, tuple[float, float]]
    imputation_k: int
    feature_names: tuple[str, ...]
    donor_matrix: np.ndarray = field(repr=False)  # scaled complete train rows

    def report(self) -> str:
        out = io.StringIO()
        out.write("preprocessing plan\n")
        out.write(f"  features kept: {len(self.feature_names)}\n")
        for col, base in sorted(self.dropped_base_categories.items()):
            out.write(f"  dummy encoding: {col} (base category {base!r})\n")
        for name, reason in self.removed_columns:
            out.write(f"  removed: {name} ({reason})\n")
        out.write(f"  scaling: min-max on train bounds, {len(self.scaling_bounds)} columns\n")
        out.write(
            f"  imputation: {self.imputation_k}-NN over {self.donor_matrix.shape[0]} "
            "complete train rows\n"
        )
        return out.getvalue()


def fit_preprocessor(
    train: TabularDataset,
    freq_ratio_cut: float = NZV_FREQ_RATIO_CUT,
    unique_pct_cut: float = NZV_UNIQUE_PCT_CUT,
    correlation_threshold: float = CORRELATION_THRESHOLD,
    imputation_k: int = IMPUTATION_K,
) -> tuple[PreprocessPlan, np.ndarray]:
    """Fit the full chain on training rows; returns the plan and train matrix."""
    encoded, levels = encode_dummies(train)
    bases = {col: lvls[0] for col, lvls in levels.items()}
    kept, nzv_removed = filter_near_zero_variance(encoded, freq_ratio_cut, unique_pct_cut)
    kept, corr_removed = filter_correlated(kept, correlation_threshold)
    bounds = fit_scaling(kept)
    scaled = apply_scaling(bounds, kept)
    X = np.column_stack([scaled.columns[n] for n in scaled.predictor_names]).astype(float)
    complete = ~np.isnan(X).any(axis=1)
    if complete.sum() < 1:
        raise ValueError("no complete training rows available for imputation donors")
    donors = X[complete]
    X = impute_knn(X, k=imputation_k, donors=donors)
    plan = PreprocessPlan(
        categorical_levels=levels,
        dropped_base_categories=bases,
        removed_columns=tuple(
            [(n, "near_zero_variance") for n in nzv_removed]
            + [(n, "high_correlation") for n in corr_removed]
        ),
        scaling_bounds=bounds,
        imputation_k=imputation_k,
        feature_names=scaled.predictor_names,
        donor_matrix=donors,
    )
    return plan, X


def apply_preprocessor(plan: PreprocessPlan, data: TabularDataset) -> np.ndarray:
    """Transform rows with train-fitted state only; bit-identical per input."""
    encoded, _ = encode_dummies(data, levels=plan.categorical_levels)
    removed = {name for name, _ in plan.removed_columns}
    schema = [c for c in encoded.predictor_schema if c.name not in removed]
    kept = _rebuild(encoded, schema, {c.name: encoded.columns[c.name] for c in schema})
    if kept.predictor_names != plan.feature_names:
        raise ValueError("columns after filtering do not match the fitted plan")
    scaled = apply_scaling(plan.scaling_bounds, kept)
    X = np.column_stack([scaled.columns[n] for n in scaled.predictor_names]).astype(float)
    return impute_knn(X, k=plan.imputation_k, donors=plan.donor_matrix)
