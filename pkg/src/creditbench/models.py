"""Classifier zoo: ten base families plus three heterogeneous ensembles.

Every fitted model exposes score(X) = estimated probability of the positive
("good", non-default) class.  Training labels arrive as default indicators
and are converted to good-indicators internally.  Fitting is deterministic
under a fixed seed.
"""
from __future__ import annotations

import hashlib
import pickle
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit, logsumexp

from .folds import stratified_folds
from .resample import ResampledSet
from .thresholds import Threshold, calibrate_threshold, predict_labels  # noqa: F401  (module surface)
from .trees import Binner, Tree, grow_classification_tree, prune_cost_complexity, grow_regression_tree

BASE_FAMILIES = (
    "logreg", "lda", "qda", "gaussian_nb", "knn",
    "cart", "bagged_cart", "random_forest", "adaboost", "sgb",
)
ENSEMBLE_FAMILIES = ("avg_simple", "avg_weighted", "stacking")
FAMILIES = BASE_FAMILIES + ENSEMBLE_FAMILIES

CART_MIN_LEAF = 7
CART_MAX_DEPTH = 30

_HYPER_DEFAULTS: dict[str, dict] = {
    "logreg": {"l2": 0.0},
    "lda": {},
    "qda": {},
    "gaussian_nb": {"laplace": 0.0, "kernel": False, "adjust": 1.0},
    "knn": {"k": 11},
    "cart": {"cp": 0.01},
    "bagged_cart": {"n_bags": 25},
    "random_forest": {"n_trees": 100, "mtry": None},
    "adaboost": {"n_iter": 100, "max_depth": 2},
    "sgb": {"n_trees": 100, "interaction_depth": 3, "shrinkage": 0.1,
            "min_obs_in_node": 10, "subsample_fraction": 0.5},
    "avg_simple": {"members": None},
    "avg_weighted": {"members": None, "cv_folds": 10},
    "stacking": {"members": None, "meta": None, "n_meta_folds": 5},
}


@dataclass(frozen=True)
class ModelSpec:
    family: str
    hyperparameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown model family {self.family!r}")
        defaults = _HYPER_DEFAULTS[self.family]
        unknown = set(self.hyperparameters) - set(defaults)
        if unknown:
            raise ValueError(f"{self.family}: unknown hyperparameter(s) {sorted(unknown)}")

    def resolved(self) -> dict:
        merged = dict(_HYPER_DEFAULTS[self.family])
        merged.update(self.hyperparameters)
        return merged

    def with_params(self, **kw) -> "ModelSpec":
        merged = dict(self.hyperparameters)
        merged.update(kw)
        return ModelSpec(self.family, merged)


class FittedModel:
    """Base for all fitted families; subclasses implement _score."""

    family: str = ""

    def __init__(self, feature_count: int, class_prior: float):
        self.feature_count = feature_count
        self.class_prior = class_prior  # training share of good cases

    def score(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.feature_count:
            raise ValueError(
                f"{self.family}: expected {self.feature_count} features, got {X.shape[1]}"
            )
        return np.clip(self._score(X), 0.0, 1.0)

    def _score(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def state_digest(self) -> str:
        """Stable digest of the learned state, for determinism checks."""
        return hashlib.sha256(pickle.dumps(self, protocol=4)).hexdigest()


def _unpack(train: ResampledSet) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(train.features, dtype=float)
    y_good = (np.asarray(train.target) == 0).astype(float)
    if y_good.min() == y_good.max():
        raise ValueError("training data must contain both classes")
    if np.isnan(X).any():
        raise ValueError("training matrix must be complete")
    return X, y_good


# ---------------------------------------------------------------------------
# linear / generative families


class FittedLogReg(FittedModel):
    family = "logreg"

    def __init__(self, beta: np.ndarray, feature_count: int, class_prior: float):
        super().__init__(feature_count, class_prior)
        self.beta = beta

    def _score(self, X):
        eta = self.beta[0] + X @ self.beta[1:]
        return expit(eta)


def _fit_logreg(X: np.ndarray, y_good: np.ndarray, l2: float) -> FittedLogReg:
    """Maximum likelihood by iteratively reweighted least squares.

    Convergence when the largest coefficient change is below 1e-8, capped at
    100 iterations (a warning is emitted when the cap binds, which happens
    on separated data).  The ridge penalty, when positive, skips the
    intercept.
    """
    n, d = X.shape
    A = np.column_stack([np.ones(n), X])
    beta = np.zeros(d + 1)
    penalty = np.diag([0.0] + [l2] * d)
    for _ in range(100):
        eta = np.clip(A @ beta, -30, 30)
        p = expit(eta)
        w = np.maximum(p * (1 - p), 1e-10)
        z = eta + (y_good - p) / w
        lhs = (A * w[:, None]).T @ A + penalty
        rhs = (A * w[:, None]).T @ z
        try:
            new = np.linalg.solve(lhs, rhs)
        except np.linalg.LinAlgError:
            new = np.linalg.lstsq(lhs, rhs, rcond=None)[0]
        step = np.max(np.abs(new - beta))
        beta = new
        if step < 1e-8:
            break
    else:
        warnings.warn("logistic regression hit the iteration cap before converging", stacklevel=2)
    return FittedLogReg(beta, d, float(y_good.mean()))


def _regularised_cov(Xc: np.ndarray) -> np.ndarray:
    """Sample covariance with a ridge when the condition estimate blows up."""
    d = Xc.shape[1]
    cov = np.cov(Xc, rowvar=False, ddof=1).reshape(d, d)
    eps = 1e-6 * np.trace(cov) / d
    try:
        cond = np.linalg.cond(cov)
    except np.linalg.LinAlgError:
        cond = np.inf
    if not np.isfinite(cond) or cond > 1e12:
        cov = cov + eps * np.eye(d)
    return cov


class FittedGaussianDiscriminant(FittedModel):
    """LDA (pooled covariance) and QDA (per-class covariance) in one shape."""

    def __init__(self, family, means, covs, log_priors, feature_count, class_prior):
        super().__init__(feature_count, class_prior)
        self.family = family
        self.means = means          # [bad, good] mean vectors
        self.covs = covs            # [bad, good] covariance matrices
        self.log_priors = log_priors
        self._chol = [np.linalg.cholesky(c) for c in covs]
        self._logdet = [2.0 * np.sum(np.log(np.diag(c))) for c in self._chol]

    def _score(self, X):
        logp = np.empty((X.shape[0], 2))
        for c in (0, 1):
            diff = X - self.means[c]
            z = np.linalg.solve(self._chol[c], diff.T)
            maha = np.sum(z * z, axis=0)
            logp[:, c] = self.log_priors[c] - 0.5 * (maha + self._logdet[c])
        return np.exp(logp[:, 1] - logsumexp(logp, axis=1))


def _fit_discriminant(X: np.ndarray, y_good: np.ndarray, pooled: bool) -> FittedGaussianDiscriminant:
    groups = [X[y_good == 0], X[y_good == 1]]  # bad, good
    if min(len(g) for g in groups) < 2:
        raise ValueError("each class needs at least 2 rows for a covariance estimate")
    means = [g.mean(axis=0) for g in groups]
    if pooled:
        n0, n1 = len(groups[0]), len(groups[1])
        pooled_cov = (
            (n0 - 1) * np.cov(groups[0], rowvar=False, ddof=1)
            + (n1 - 1) * np.cov(groups[1], rowvar=False, ddof=1)
        ) / (n0 + n1 - 2)
        d = X.shape[1]
        pooled_cov = pooled_cov.reshape(d, d)
        eps = 1e-6 * np.trace(pooled_cov) / d
        try:
            bad_cond = np.linalg.cond(pooled_cov) > 1e12
        except np.linalg.LinAlgError:
            bad_cond = True
        if bad_cond:
            pooled_cov = pooled_cov + eps * np.eye(d)
        covs = [pooled_cov, pooled_cov]
    else:
        covs = [_regularised_cov(g) for g in groups]
    priors = np.array([(y_good == 0).mean(), (y_good == 1).mean()])
    return FittedGaussianDiscriminant(
        "lda" if pooled else "qda",
        means, covs, np.log(priors), X.shape[1], float(y_good.mean()),
    )


class FittedNaiveBayes(FittedModel):
    family = "gaussian_nb"

    def __init__(self, feature_count, class_prior, log_priors, gaussian, kde):
        super().__init__(feature_count, class_prior)
        self.log_priors = log_priors
        self.gaussian = gaussian  # (means, vars) per class or None
        self.kde = kde            # per class: (grid, density) per feature, or None

    def _score(self, X):
        logp = np.tile(self.log_priors, (X.shape[0], 1))
        if self.gaussian is not None:
            means, variances = self.gaussian
            for c in (0, 1):
                logp[:, c] += np.sum(
                    -0.5 * (np.log(2 * np.pi * variances[c]) + (X - means[c]) ** 2 / variances[c]),
                    axis=1,
                )
        else:
            for c in (0, 1):
                for j, (grid, dens) in enumerate(self.kde[c]):
                    val = np.interp(X[:, j], grid, dens, left=dens[0], right=dens[-1])
                    logp[:, c] += np.log(np.maximum(val, 1e-300))
        return np.exp(logp[:, 1] - logsumexp(logp, axis=1))


def _nrd0(x: np.ndarray) -> float:
    """Silverman's rule-of-thumb bandwidth as used by classic density tooling."""
    sd = x.std(ddof=1) if x.size > 1 else 0.0
    iqr = np.subtract(*np.percentile(x, [75, 25]))
    spread = min(sd, iqr / 1.34) if iqr > 0 and sd > 0 else max(sd, iqr / 1.34)
    if spread <= 0:
        spread = abs(x[0]) if abs(x[0]) > 0 else 1.0
    return 0.9 * spread * x.size ** (-0.2)


def _kde_on_grid(x: np.ndarray, h: float, points: int = 512) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian KDE via linear binning and FFT convolution on a fixed grid."""
    lo, hi = x.min() - 3 * h, x.max() + 3 * h
    if hi <= lo:
        lo, hi = lo - 1e-6, hi + 1e-6
    grid = np.linspace(lo, hi, points)
    step = grid[1] - grid[0]
    pos = np.clip((x - lo) / step, 0, points - 1)
    lo_idx = np.floor(pos).astype(np.int64)
    frac = pos - lo_idx
    counts = np.bincount(lo_idx, weights=1.0 - frac, minlength=points)
    counts += np.bincount(np.minimum(lo_idx + 1, points - 1), weights=frac, minlength=points)
    offsets = (np.arange(2 * points - 1) - (points - 1)) * step
    kernel = np.exp(-0.5 * (offsets / h) ** 2)
    dens = np.convolve(counts, kernel, mode="valid")
    dens = np.maximum(dens, 0.0) / (x.size * h * np.sqrt(2 * np.pi))
    return grid, dens


def _fit_naive_bayes(X, y_good, laplace: float, kernel: bool, adjust: float) -> FittedNaiveBayes:
    # laplace smoothing only affects factor features, which the preprocessing
    # chain has already dummy-encoded to numerics; accepted for schema parity
    _ = laplace
    groups = [X[y_good == 0], X[y_good == 1]]
    priors = np.array([(y_good == 0).mean(), (y_good == 1).mean()])
    if not kernel:
        means = [g.mean(axis=0) for g in groups]
        var_floor = max(1e-9 * float(X.var(axis=0).max()), 1e-12)
        variances = [np.maximum(g.var(axis=0, ddof=1), var_floor) for g in groups]
        return FittedNaiveBayes(X.shape[1], float(y_good.mean()), np.log(priors),
                                (means, variances), None)
    kde = []
    for g in groups:
        per_feature = []
        for j in range(X.shape[1]):
            h = max(_nrd0(g[:, j]) * adjust, 1e-9)
            per_feature.append(_kde_on_grid(g[:, j], h))
        kde.append(per_feature)
    return FittedNaiveBayes(X.shape[1], float(y_good.mean()), np.log(priors), None, kde)


class FittedKNN(FittedModel):
    family = "knn"

    def __init__(self, X, y_good, k):
        super().__init__(X.shape[1], float(y_good.mean()))
        self.X = X
        self.y_good = y_good
        self.k = int(k)

    def _score(self, X):
        """Share of good cases among the k nearest training rows.

        Distance ties at the k boundary resolve to the lowest training row
        index, so scoring is order-independent and deterministic.
        """
        train = self.X
        sq_train = np.einsum("ij,ij->i", train, train)
        out = np.empty(X.shape[0])
        k = min(self.k, train.shape[0])
        for start in range(0, X.shape[0], 256):
            q = X[start:start + 256]
            d2 = np.maximum(
                sq_train[None, :] - 2.0 * q @ train.T
                + np.einsum("ij,ij->i", q, q)[:, None],
                0.0,
            )
            if k < train.shape[0]:
                part = np.argpartition(d2, k - 1, axis=1)[:, :k]
                kth = np.take_along_axis(d2, part[:, -1:], axis=1)
            else:
                part = None
                kth = d2.max(axis=1, keepdims=True)
            for row in range(q.shape[0]):
                boundary = d2[row] <= kth[row] + 1e-12
                cand = np.flatnonzero(boundary)
                if cand.size > k:
                    order = np.lexsort((cand, d2[row, cand]))
                    cand = cand[order[:k]]
                out[start + row] = self.y_good[cand].mean()
        return out


# ---------------------------------------------------------------------------
# tree families


class FittedTreeModel(FittedModel):
    def __init__(self, trees: list[Tree], feature_count: int, class_prior: float):
        super().__init__(feature_count, class_prior)
        self.trees = trees

    def _score(self, X):
        return np.mean([t.predict(X) for t in self.trees], axis=0)


class FittedCart(FittedTreeModel):
    family = "cart"


class FittedBaggedCart(FittedTreeModel):
    family = "bagged_cart"


class FittedRandomForest(FittedTreeModel):
    family = "random_forest"


def _fit_cart(X, y_good, cp: float, seed: int) -> FittedCart:
    binner = Binner(X)
    codes = binner.codes(X)
    ones = np.ones(len(y_good))
    tree = grow_classification_tree(
        codes, binner.n_bins, y_good, ones, ones, binner.edges,
        max_depth=CART_MAX_DEPTH, min_leaf=CART_MIN_LEAF, mtry=None,
        rng=np.random.default_rng(seed),
    )
    tree = prune_cost_complexity(tree, cp)
    return FittedCart([tree], X.shape[1], float(y_good.mean()))


def _bootstrap_tree(codes, binner, y_good, rng, mtry) -> Tree:
    n = len(y_good)
    draws = rng.integers(0, n, n)
    w = np.bincount(draws, minlength=n).astype(float)
    return grow_classification_tree(
        codes, binner.n_bins, y_good, w, w, binner.edges,
        max_depth=CART_MAX_DEPTH, min_leaf=CART_MIN_LEAF, mtry=mtry, rng=rng,
    )


def _fit_bagged(X, y_good, n_bags: int, seed: int) -> FittedBaggedCart:
    binner = Binner(X)
    codes = binner.codes(X)
    trees = [
        _bootstrap_tree(codes, binner, y_good, np.random.default_rng([seed, t]), None)
        for t in range(n_bags)
    ]
    return FittedBaggedCart(trees, X.shape[1], float(y_good.mean()))


def _fit_forest(X, y_good, n_trees: int, mtry: int | None, seed: int) -> FittedRandomForest:
    d = X.shape[1]
    mtry = int(round(np.sqrt(d))) if mtry is None else int(mtry)
    mtry = max(1, min(mtry, d))
    binner = Binner(X)
    codes = binner.codes(X)
    trees = [
        _bootstrap_tree(codes, binner, y_good, np.random.default_rng([seed, t]), mtry)
        for t in range(n_trees)
    ]
    return FittedRandomForest(trees, d, float(y_good.mean()))


class FittedAdaBoost(FittedModel):
    family = "adaboost"

    def __init__(self, trees, alphas, feature_count, class_prior):
        super().__init__(feature_count, class_prior)
        self.trees = trees
        self.alphas = alphas

    def margin(self, X) -> np.ndarray:
        F = np.zeros(X.shape[0])
        for tree, alpha in zip(self.trees, self.alphas):
            F += alpha * np.where(tree.predict(X) >= 0.5, 1.0, -1.0)
        return F

    def _score(self, X):
        # logistic transform of the boosted margin
        return expit(2.0 * self.margin(X))


def _fit_adaboost(X, y_good, n_iter: int, max_depth: int, seed: int) -> FittedAdaBoost:
    """Reweighted boosting: misclassified rows gain exponential weight."""
    binner = Binner(X)
    codes = binner.codes(X)
    n = len(y_good)
    ones = np.ones(n)
    y_pm = np.where(y_good > 0.5, 1.0, -1.0)
    w = np.full(n, 1.0 / n)
    trees: list[Tree] = []
    alphas: list[float] = []
    rng = np.random.default_rng(seed)
    for _ in range(n_iter):
        tree = grow_classification_tree(
            codes, binner.n_bins, y_good, w, ones, binner.edges,
            max_depth=max_depth, min_leaf=1, mtry=None, rng=rng,
        )
        pred = np.where(tree.predict(X) >= 0.5, 1.0, -1.0)
        err = float(np.sum(w * (pred != y_pm)))
        if err >= 0.5:
            break
        if err <= 0.0:
            trees.append(tree)
            alphas.append(0.5 * np.log((1 - 1e-10) / 1e-10))
            break
        alpha = 0.5 * np.log((1 - err) / err)
        trees.append(tree)
        alphas.append(alpha)
        w = w * np.exp(-alpha * y_pm * pred)
        w /= w.sum()
    if not trees:
        # no weak learner beat chance; fall back to the prior
        trees = [grow_classification_tree(codes, binner.n_bins, y_good, ones, ones,
                                          binner.edges, max_depth=0, min_leaf=1,
                                          mtry=None, rng=rng)]
        alphas = [0.0]
    return FittedAdaBoost(trees, alphas, X.shape[1], float(y_good.mean()))


class FittedSGB(FittedModel):
    family = "sgb"

    def __init__(self, f0, trees, shrinkage, feature_count, class_prior):
        super().__init__(feature_count, class_prior)
        self.f0 = f0
        self.trees = trees
        self.shrinkage = shrinkage

    def raw(self, X) -> np.ndarray:
        F = np.full(X.shape[0], self.f0)
        for tree in self.trees:
            F += self.shrinkage * tree.predict(X)
        return F

    def _score(self, X):
        return expit(self.raw(X))


def _fit_sgb(X, y_good, n_trees, interaction_depth, shrinkage,
             min_obs_in_node, subsample_fraction, seed) -> FittedSGB:
    """Gradient boosting on logistic loss; each round fits a least-squares
    tree to the current gradient on a without-replacement subsample."""
    binner = Binner(X)
    codes = binner.codes(X)
    n = len(y_good)
    p_bar = float(np.clip(y_good.mean(), 1e-6, 1 - 1e-6))
    f0 = float(np.log(p_bar / (1 - p_bar)))
    F = np.full(n, f0)
    rng = np.random.default_rng(seed)
    n_sub = max(2 * min_obs_in_node, int(np.floor(subsample_fraction * n)))
    n_sub = min(n, n_sub)
    trees: list[Tree] = []
    for _ in range(n_trees):
        p = expit(F)
        grad = y_good - p
        hess = np.maximum(p * (1 - p), 1e-12)
        rows = np.sort(rng.choice(n, n_sub, replace=False)) if n_sub < n else np.arange(n)
        tree = grow_regression_tree(
            codes, binner.n_bins, grad, hess, rows, binner.edges,
            max_depth=interaction_depth, min_leaf=min_obs_in_node,
        )
        trees.append(tree)
        F += shrinkage * tree.predict(X)
    return FittedSGB(f0, trees, shrinkage, X.shape[1], float(y_good.mean()))


# ---------------------------------------------------------------------------
# heterogeneous ensembles


def default_member_specs() -> list[ModelSpec]:
    """The ten base families under their default hyperparameters."""
    return [ModelSpec(f) for f in BASE_FAMILIES]


def _member_cv_accuracy(spec: ModelSpec, train: ResampledSet, n_folds: int, seed: int) -> float:
    """Stratified CV accuracy of one member at the 0.5 cutoff."""
    y = np.asarray(train.target)
    fold = stratified_folds(y, n_folds, seed)
    hits = 0
    for f in range(n_folds):
        tr, te = fold != f, fold == f
        sub = ResampledSet(train.features[tr], y[tr], train.provenance[tr])
        model = fit(spec, sub, seed=seed * 1000 + f)
        pred_good = model.score(train.features[te]) >= 0.5
        hits += int(np.sum(pred_good == (y[te] == 0)))
    return hits / len(y)


class FittedAverage(FittedModel):
    def __init__(self, family, members, weights, feature_count, class_prior):
        super().__init__(feature_count, class_prior)
        self.family = family
        self.members = members
        self.weights = np.asarray(weights, dtype=float)

    def _score(self, X):
        scores = np.column_stack([m.score(X) for m in self.members])
        return scores @ (self.weights / self.weights.sum())


class FittedStacking(FittedModel):
    family = "stacking"

    def __init__(self, members, meta_model, meta_matrix, feature_count, class_prior):
        super().__init__(feature_count, class_prior)
        self.members = members
        self.meta_model = meta_model
        self.meta_training_matrix = meta_matrix  # out-of-fold member scores

    def _score(self, X):
        meta_X = np.column_stack([m.score(X) for m in self.members])
        return self.meta_model.score(meta_X)


def _fit_heterogeneous(
    spec: ModelSpec,
    train: ResampledSet,
    seed: int,
    fitted_members: list[FittedModel] | None = None,
    member_weights: list[float] | None = None,
) -> FittedModel:
    hp = spec.resolved()
    member_specs: list[ModelSpec] = hp["members"] or default_member_specs()
    member_specs = [m if isinstance(m, ModelSpec) else ModelSpec(**m) for m in member_specs]
    if fitted_members is None:
        fitted_members = [fit(m, train, seed=_derive_seed(seed, i)) for i, m in enumerate(member_specs)]
    if len(fitted_members) != len(member_specs):
        raise ValueError("fitted members do not align with member specs")
    prior = float((np.asarray(train.target) == 0).mean())
    d = train.features.shape[1]

    if spec.family == "avg_simple":
        return FittedAverage("avg_simple", fitted_members, np.ones(len(fitted_members)), d, prior)

    if spec.family == "avg_weighted":
        if member_weights is not None:
            if len(member_weights) != len(member_specs):
                raise ValueError("member_weights do not align with member specs")
            weights = np.asarray(member_weights, dtype=float)
        else:
            weights = np.array([
                _member_cv_accuracy(m, train, hp["cv_folds"], seed=_derive_seed(seed, 101 + i))
                for i, m in enumerate(member_specs)
            ])
        if weights.sum() <= 0:
            weights = np.ones_like(weights)
        return FittedAverage("avg_weighted", fitted_members, weights, d, prior)

    # stacking: out-of-fold member scores become the meta training matrix
    n_folds = hp["n_meta_folds"]
    y = np.asarray(train.target)
    fold = stratified_folds(y, n_folds, seed=_derive_seed(seed, 555))
    meta_X = np.zeros((len(y), len(member_specs)))
    for f in range(n_folds):
        tr, te = fold != f, fold == f
        sub = ResampledSet(train.features[tr], y[tr], train.provenance[tr])
        for j, mspec in enumerate(member_specs):
            model = fit(mspec, sub, seed=_derive_seed(seed, 1000 + f * 100 + j))
            meta_X[te, j] = model.score(train.features[te])
    meta_spec = hp["meta"] or ModelSpec("sgb", {"n_trees": 100, "interaction_depth": 2,
                                                "shrinkage": 0.1, "min_obs_in_node": 10,
                                                "subsample_fraction": 0.5})
    if not isinstance(meta_spec, ModelSpec):
        meta_spec = ModelSpec(**meta_spec)
    if meta_spec.family != "sgb":
        raise ValueError("the stacking meta-learner must be an sgb spec")
    meta_train = ResampledSet(meta_X, y, np.asarray(train.provenance))
    meta_model = fit(meta_spec, meta_train, seed=_derive_seed(seed, 777))
    return FittedStacking(fitted_members, meta_model, meta_X, d, prior)


def _derive_seed(seed: int, salt: int) -> int:
    digest = hashlib.sha256(f"{seed}:{salt}".encode()).digest()
    return int.from_bytes(digest[:8], "big") % (2**63)


# ---------------------------------------------------------------------------
# entry points


def fit(
    spec: ModelSpec,
    train: ResampledSet,
    seed: int = 0,
    fitted_members: list[FittedModel] | None = None,
    member_weights: list[float] | None = None,
) -> FittedModel:
    """Train one classifier on a (resampled) training set.

    Heterogeneous ensembles accept pre-fitted members and, for the weighted
    average, CV-accuracy weights already measured during tuning.
    """
    if spec.family in ENSEMBLE_FAMILIES:
        return _fit_heterogeneous(spec, train, seed, fitted_members, member_weights)
    X, y_good = _unpack(train)
    hp = spec.resolved()
    if spec.family == "logreg":
        return _fit_logreg(X, y_good, hp["l2"])
    if spec.family == "lda":
        return _fit_discriminant(X, y_good, pooled=True)
    if spec.family == "qda":
        return _fit_discriminant(X, y_good, pooled=False)
    if spec.family == "gaussian_nb":
        return _fit_naive_bayes(X, y_good, hp["laplace"], hp["kernel"], hp["adjust"])
    if spec.family == "knn":
        return FittedKNN(X, y_good, hp["k"])
    if spec.family == "cart":
        return _fit_cart(X, y_good, hp["cp"], seed)
    if spec.family == "bagged_cart":
        return _fit_bagged(X, y_good, hp["n_bags"], seed)
    if spec.family == "random_forest":
        return _fit_forest(X, y_good, hp["n_trees"], hp["mtry"], seed)
    if spec.family == "adaboost":
        return _fit_adaboost(X, y_good, hp["n_iter"], hp["max_depth"], seed)
    if spec.family == "sgb":
        return _fit_sgb(X, y_good, hp["n_trees"], hp["interaction_depth"], hp["shrinkage"],
                        hp["min_obs_in_node"], hp["subsample_fraction"], seed)
    raise ValueError(f"unknown family {spec.family!r}")


def score(model: FittedModel, X: np.ndarray) -> np.ndarray:
    return model.score(X)


MODEL_FORMAT_VERSION = 1
_MAGIC = b"CBMODEL"


def save_model(model: FittedModel, path: str | Path) -> None:
    """Versioned binary container; stable within MODEL_FORMAT_VERSION."""
    payload = pickle.dumps(model, protocol=4)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(MODEL_FORMAT_VERSION.to_bytes(2, "big"))
        fh.write(payload)


def load_model(path: str | Path) -> FittedModel:
    with open(path, "rb") as fh:
        magic = fh.read(len(_MAGIC))
        if magic != _MAGIC:
            raise ValueError(f"{path}: not a model file")
        version = int.from_bytes(fh.read(2), "big")
        if version != MODEL_FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported model format version {version}")
        return pickle.load(fh)
