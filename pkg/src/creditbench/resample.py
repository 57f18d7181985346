"""Training-set rebalancing strategies: down/up-sampling, SMOTE,
borderline SMOTE and ROSE.  The test set is never touched.

All samplers operate on the preprocessed numeric training matrix and are
pure functions of (input, config): identical seeds give bit-identical
output.  Synthetic generation derives one RNG per source row index, so the
result does not depend on evaluation order.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SAMPLER_KINDS = ("none", "down", "up", "smote", "bsmote", "rose")

PROV_ORIGINAL = "original"
PROV_DUPLICATE = "duplicate"
PROV_SYNTHETIC = "synthetic"


@dataclass(frozen=True)
class SamplerConfig:
    kind: str
    seed: int = 0
    smote_over_pct: int = 200
    smote_under_pct: int = 200
    smote_k: int = 5
    bsmote_m: int = 10
    bsmote_target: int | None = None  # minority rows to reach; None = balance
    rose_shrink: float = 1.0
    down_cap: int | None = None       # optional per-class ceiling after down-sampling

    def __post_init__(self):
        if self.kind not in SAMPLER_KINDS:
            raise ValueError(f"unknown sampler kind {self.kind!r}")
        if self.smote_over_pct <= 0:
            raise ValueError("smote_over_pct must be positive")
        if self.smote_k < 1:
            raise ValueError("smote_k must be >= 1")
        if self.bsmote_m < self.smote_k:
            raise ValueError("bsmote_m must be >= smote_k")


@dataclass(frozen=True)
class ResampledSet:
    features: np.ndarray = field(repr=False)
    target: np.ndarray = field(repr=False)
    provenance: np.ndarray = field(repr=False)  # original | duplicate | synthetic

    def __post_init__(self):
        if not (len(self.features) == len(self.target) == len(self.provenance)):
            raise ValueError("features, target and provenance must align")

    def class_counts(self) -> tuple[int, int]:
        d = int(self.target.sum())
        return len(self.target) - d, d


def _as_resampled(X, y, prov) -> ResampledSet:
    return ResampledSet(
        features=np.asarray(X, dtype=float),
        target=np.asarray(y, dtype=np.int8),
        provenance=np.asarray(prov, dtype=object),
    )


def _check_two_classes(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    idx0 = np.flatnonzero(y == 0)
    idx1 = np.flatnonzero(y == 1)
    if idx0.size == 0 or idx1.size == 0:
        raise ValueError("resampling needs both classes in the training data")
    return idx0, idx1


def _minority_majority(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(minority indices, majority indices); ties treat the default class as minority."""
    idx0, idx1 = _check_two_classes(y)
    if idx1.size <= idx0.size:
        return idx1, idx0
    return idx0, idx1


def _mark_draws(drawn: np.ndarray) -> np.ndarray:
    """original on a source row's first appearance, duplicate afterwards."""
    prov = np.empty(drawn.size, dtype=object)
    seen: set[int] = set()
    for i, src in enumerate(drawn):
        if src in seen:
            prov[i] = PROV_DUPLICATE
        else:
            prov[i] = PROV_ORIGINAL
            seen.add(int(src))
    return prov


def downsample(X: np.ndarray, y: np.ndarray, seed: int, cap: int | None = None) -> ResampledSet:
    """Both classes at the minority frequency; majority drawn without replacement."""
    minority, majority = _minority_majority(np.asarray(y))
    rng = np.random.default_rng(seed)
    count = minority.size if cap is None else min(cap, minority.size)
    keep_min = minority if count == minority.size else np.sort(rng.choice(minority, count, replace=False))
    keep_maj = np.sort(rng.choice(majority, count, replace=False))
    keep = np.sort(np.concatenate([keep_min, keep_maj]))
    return _as_resampled(X[keep], np.asarray(y)[keep], np.full(keep.size, PROV_ORIGINAL, dtype=object))


def upsample(X: np.ndarray, y: np.ndarray, seed: int) -> ResampledSet:
    """Minority duplicated with replacement until class counts match."""
    y = np.asarray(y)
    minority, majority = _minority_majority(y)
    rng = np.random.default_rng(seed)
    extra_n = majority.size - minority.size
    extra = rng.choice(minority, extra_n, replace=True) if extra_n > 0 else np.empty(0, dtype=int)
    order = np.concatenate([np.arange(len(y)), extra]).astype(int)
    prov = np.concatenate([np.full(len(y), PROV_ORIGINAL, dtype=object),
                           np.full(extra_n, PROV_DUPLICATE, dtype=object)])
    return _as_resampled(X[order], y[order], prov)


def _nearest_neighbors(X: np.ndarray, query: np.ndarray, k: int, exclude_self: int | None = None) -> np.ndarray:
    """Indices into X of the k nearest rows to query; ties on the lower index."""
    diff = X - query
    dist = np.sqrt(np.sum(diff * diff, axis=1))
    if exclude_self is not None:
        dist[exclude_self] = np.inf
    order = np.lexsort((np.arange(len(X)), dist))
    return order[:k]


def _interpolate(rng: np.random.Generator, x: np.ndarray, x_nn: np.ndarray) -> np.ndarray:
    u = rng.uniform(0.0, 1.0)
    return x + u * (x_nn - x)


def smote(X: np.ndarray, y: np.ndarray, config: SamplerConfig) -> ResampledSet:
    """Interpolated minority oversampling plus majority resampling.

    Every minority row spawns over_pct/100 synthetic rows on segments towards
    its k minority nearest neighbours; the majority class is then resampled
    (with replacement) to under_pct/100 times the synthetic count.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    minority, majority = _minority_majority(y)
    if minority.size <= config.smote_k:
        raise ValueError(
            f"SMOTE needs more than k={config.smote_k} minority rows, have {minority.size}"
        )
    X_min = X[minority]
    per_row = config.smote_over_pct // 100
    remainder = round((config.smote_over_pct % 100) / 100.0 * minority.size)
    extra_rows = np.random.default_rng([config.seed, 7]).choice(
        minority.size, remainder, replace=False) if remainder else np.empty(0, dtype=int)
    extra_set = set(extra_rows.tolist())

    synth: list[np.ndarray] = []
    parents: list[int] = []
    for local_i in range(minority.size):
        n_here = per_row + (1 if local_i in extra_set else 0)
        if n_here == 0:
            continue
        neigh = _nearest_neighbors(X_min, X_min[local_i], config.smote_k, exclude_self=local_i)
        rng = np.random.default_rng([config.seed, local_i])
        for _ in range(n_here):
            nn = neigh[rng.integers(0, neigh.size)]
            synth.append(_interpolate(rng, X_min[local_i], X_min[nn]))
            parents.append(int(minority[local_i]))
    n_syn = len(synth)
    minority_label = int(y[minority[0]])

    n_under = round(config.smote_under_pct / 100.0 * n_syn)
    maj_rng = np.random.default_rng([config.seed, 11])
    drawn_maj = maj_rng.choice(majority, n_under, replace=True)

    feats = np.vstack([X[minority], np.array(synth), X[drawn_maj]])
    target = np.concatenate([
        np.full(minority.size, minority_label),
        np.full(n_syn, minority_label),
        y[drawn_maj],
    ])
    prov = np.concatenate([
        np.full(minority.size, PROV_ORIGINAL, dtype=object),
        np.full(n_syn, PROV_SYNTHETIC, dtype=object),
        _mark_draws(drawn_maj),
    ])
    return _as_resampled(feats, target, prov)


def borderline_danger_set(X: np.ndarray, y: np.ndarray, m: int) -> np.ndarray:
    """Minority rows whose m-neighbourhood is majority-dominated but not pure.

    With m' majority rows among the m nearest neighbours (any class,
    excluding the point itself): noise when m' = m, safe when m' < m/2,
    danger when m/2 <= m' < m.
    """
    minority, _ = _minority_majority(y)
    danger: list[int] = []
    for i in minority:
        neigh = _nearest_neighbors(X, X[i], m, exclude_self=int(i))
        m_prime = int((y[neigh] != y[i]).sum())
        if m / 2.0 <= m_prime < m:
            danger.append(int(i))
    return np.array(danger, dtype=int)


def borderline_smote(X: np.ndarray, y: np.ndarray, config: SamplerConfig) -> ResampledSet:
    """SMOTE restricted to borderline minority rows (danger set).

    Synthetic rows interpolate from danger members towards their k minority
    nearest neighbours until the minority reaches the target count
    (default: the majority count).  An empty danger set returns the input
    unchanged with a warning.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    minority, majority = _minority_majority(y)
    if minority.size <= max(config.smote_k, 1):
        raise ValueError("borderline SMOTE needs more minority rows than k")
    danger = borderline_danger_set(X, y, config.bsmote_m)
    if danger.size == 0:
        warnings.warn("empty danger set: returning the training data unchanged", stacklevel=2)
        return _as_resampled(X, y, np.full(len(y), PROV_ORIGINAL, dtype=object))

    target_minority = config.bsmote_target if config.bsmote_target is not None else majority.size
    n_syn = max(0, target_minority - minority.size)
    base, leftover = divmod(n_syn, danger.size)
    X_min = X[minority]
    local_of = {int(g): i for i, g in enumerate(minority)}
    minority_label = int(y[minority[0]])

    synth: list[np.ndarray] = []
    for rank, gi in enumerate(danger):
        n_here = base + (1 if rank < leftover else 0)
        if n_here == 0:
            continue
        li = local_of[int(gi)]
        neigh = _nearest_neighbors(X_min, X_min[li], config.smote_k, exclude_self=li)
        rng = np.random.default_rng([config.seed, li])
        for _ in range(n_here):
            nn = neigh[rng.integers(0, neigh.size)]
            synth.append(_interpolate(rng, X_min[li], X_min[nn]))

    feats = np.vstack([X, np.array(synth)]) if synth else X.copy()
    target = np.concatenate([y, np.full(len(synth), minority_label)])
    prov = np.concatenate([
        np.full(len(y), PROV_ORIGINAL, dtype=object),
        np.full(len(synth), PROV_SYNTHETIC, dtype=object),
    ])
    return _as_resampled(feats, target, prov)


def rose_bandwidths(X_class: np.ndarray, shrink: float) -> np.ndarray:
    """Per-coordinate kernel widths: shrink * (4 / ((d+2) n))^(1/(d+4)) * sd."""
    n, d = X_class.shape
    if n < 2:
        warnings.warn("single-member class: falling back to zero bandwidth", stacklevel=2)
        return np.zeros(d)
    sd = X_class.std(axis=0, ddof=1)
    return shrink * (4.0 / ((d + 2.0) * n)) ** (1.0 / (d + 4.0)) * sd


def rose(X: np.ndarray, y: np.ndarray, config: SamplerConfig) -> ResampledSet:
    """Smoothed bootstrap: equal class odds, Gaussian kernel around seed rows."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if np.isnan(X).any():
        raise ValueError("ROSE requires a complete numeric matrix")
    idx_by_class = dict(zip((0, 1), _check_two_classes(y)))
    h = {c: rose_bandwidths(X[idx], config.rose_shrink) for c, idx in idx_by_class.items()}
    rng = np.random.default_rng(config.seed)
    n = len(y)
    classes = rng.integers(0, 2, size=n)
    sources = np.array([idx_by_class[c][rng.integers(0, idx_by_class[c].size)] for c in classes])
    feats = X[sources].copy()
    if config.rose_shrink > 0:
        for c in (0, 1):
            rows = classes == c
            feats[rows] += rng.normal(0.0, 1.0, size=(int(rows.sum()), X.shape[1])) * h[c]
        prov = np.full(n, PROV_SYNTHETIC, dtype=object)
    else:
        prov = _mark_draws(sources)
    return _as_resampled(feats, classes, prov)


def apply_sampler(X: np.ndarray, y: np.ndarray, config: SamplerConfig) -> ResampledSet:
    if config.kind == "none":
        return _as_resampled(X, y, np.full(len(y), PROV_ORIGINAL, dtype=object))
    if config.kind == "down":
        return downsample(X, y, config.seed, cap=config.down_cap)
    if config.kind == "up":
        return upsample(X, y, config.seed)
    if config.kind == "smote":
        return smote(X, y, config)
    if config.kind == "bsmote":
        return borderline_smote(X, y, config)
    if config.kind == "rose":
        return rose(X, y, config)
    raise ValueError(f"unknown sampler kind {config.kind!r}")


def export_resampled_csv(rs: ResampledSet, feature_names: list[str], path: str | Path) -> None:
    """Audit export with a provenance column."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(feature_names) + ["target", "provenance"])
        for i in range(len(rs.target)):
            writer.writerow(
                [repr(float(v)) for v in rs.features[i]]
                + [int(rs.target[i]), rs.provenance[i]]
            )
