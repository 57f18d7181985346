"""Histogram-based binary decision trees shared by every tree-family model.

Features are binned once per training matrix (exact splits when a feature
has few distinct values, quantile bins otherwise).  Trees grow level-wise:
one histogram pass per depth level covers every open node, so split search
is a handful of vectorised array operations regardless of node count.
Classification trees split on weighted Gini impurity, regression trees on
least squares over gradients with Newton leaf values.  Ties (feature, bin)
break towards the lower index so training is deterministic under a fixed
RNG.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_BINS = 64
NO_FEATURE = -1


class Binner:
    """Per-feature bin edges; code b means edges[b-1] <= x < edges[b]."""

    def __init__(self, X: np.ndarray, max_bins: int = MAX_BINS):
        X = np.asarray(X, dtype=float)
        self.edges: list[np.ndarray] = []
        for f in range(X.shape[1]):
            u = np.unique(X[:, f])
            if u.size <= 1:
                self.edges.append(np.empty(0))
            elif u.size <= max_bins:
                self.edges.append((u[:-1] + u[1:]) / 2.0)
            else:
                pick = np.unique(np.linspace(0, u.size - 2, max_bins - 1).astype(int))
                self.edges.append((u[pick] + u[pick + 1]) / 2.0)
        self.n_bins = np.array([e.size + 1 for e in self.edges], dtype=np.int64)

    def codes(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = np.empty(X.shape, dtype=np.int32)
        for f, e in enumerate(self.edges):
            out[:, f] = np.searchsorted(e, X[:, f], side="right") if e.size else 0
        return out


@dataclass
class Tree:
    feature: np.ndarray    # NO_FEATURE for leaves
    threshold: np.ndarray  # raw-space split value; go left when x < threshold
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray      # leaf prediction (kept for internal nodes too)
    n_node: np.ndarray     # training row count per node
    n_good: np.ndarray     # training good count per node (classification only)

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature == NO_FEATURE))

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] != NO_FEATURE
        while active.any():
            idx = np.flatnonzero(active)
            nd = node[idx]
            go_left = X[idx, self.feature[nd]] < self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active[idx] = self.feature[node[idx]] != NO_FEATURE
        return self.value[node]


class _LevelwiseBuilder:
    """Grows a tree breadth-first; children always get larger ids than parents."""

    def __init__(self, codes: np.ndarray, n_bins: np.ndarray, edges: list[np.ndarray],
                 max_depth: int, min_leaf: int, mtry: int | None,
                 rng: np.random.Generator | None):
        self.codes = codes
        self.n_bins = n_bins
        self.width = int(np.max(n_bins))  # widest feature governs the bin axis
        self.edges = edges
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        d = codes.shape[1]
        self.mtry = None if (mtry is None or mtry >= d) else int(mtry)
        self.rng = rng
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []
        self.n_node: list[int] = []
        self.n_good: list[int] = []

    def _new_node(self) -> int:
        for arr, default in ((self.feature, NO_FEATURE), (self.threshold, 0.0),
                             (self.left, -1), (self.right, -1), (self.value, 0.0),
                             (self.n_node, 0), (self.n_good, 0)):
            arr.append(default)
        return len(self.feature) - 1

    def _level_histograms(self, rows: np.ndarray, local: np.ndarray, k: int,
                          weights: list[np.ndarray]) -> list[np.ndarray]:
        d = self.codes.shape[1]
        B = self.width
        base = local.astype(np.int64) * (d * B)
        idx = (base[:, None] + np.arange(d, dtype=np.int64) * B + self.codes[rows]).ravel()
        size = k * d * B
        out = []
        for w in weights:
            flat_w = np.broadcast_to(w[:, None], (rows.size, d)).ravel()
            out.append(np.bincount(idx, weights=flat_w, minlength=size).reshape(k, d, B))
        return out

    def _valid_bins(self, k: int) -> np.ndarray:
        return np.broadcast_to(np.arange(self.width) < (self.n_bins - 1)[:, None],
                               (k, self.codes.shape[1], self.width))

    def _mtry_mask(self, k: int) -> np.ndarray | None:
        if self.mtry is None:
            return None
        d = self.codes.shape[1]
        # one uniform draw per (node, feature); the mtry smallest are the subset
        keys = self.rng.random((k, d))
        chosen = np.argpartition(keys, self.mtry - 1, axis=1)[:, : self.mtry]
        mask = np.zeros((k, d), dtype=bool)
        np.put_along_axis(mask, chosen, True, axis=1)
        return mask

    def _finish(self) -> Tree:
        return Tree(
            feature=np.array(self.feature, dtype=np.int64),
            threshold=np.array(self.threshold, dtype=float),
            left=np.array(self.left, dtype=np.int64),
            right=np.array(self.right, dtype=np.int64),
            value=np.array(self.value, dtype=float),
            n_node=np.array(self.n_node, dtype=np.int64),
            n_good=np.array(self.n_good, dtype=np.int64),
        )

    def _route_rows(self, rows, local, split_feat, split_bin, did_split,
                    node_of_row, child_left, child_right) -> None:
        """Send each active row to its child (or retire it at a leaf)."""
        f_per_row = split_feat[local]
        b_per_row = split_bin[local]
        split_row = did_split[local]
        codes_at = self.codes[rows, np.where(split_row, f_per_row, 0)]
        go_left = codes_at <= b_per_row
        new_nodes = np.where(go_left, child_left[local], child_right[local])
        node_of_row[rows] = np.where(split_row, new_nodes, -1)


def grow_classification_tree(
    codes: np.ndarray,
    n_bins: np.ndarray,
    y_good: np.ndarray,
    w_stat: np.ndarray,
    w_count: np.ndarray,
    edges: list[np.ndarray],
    max_depth: int = 30,
    min_leaf: int = 1,
    mtry: int | None = None,
    rng: np.random.Generator | None = None,
) -> Tree:
    """Greedy Gini tree on binned features.

    ``w_stat`` weighs the impurity statistics (boosting weights, bootstrap
    multiplicities); ``w_count`` carries row counts for the min_leaf rule.
    When ``mtry`` is given, each node draws that many candidate features.
    """
    y_good = np.asarray(y_good, dtype=float)
    w_stat = np.asarray(w_stat, dtype=float)
    w_count = np.asarray(w_count, dtype=float)
    b = _LevelwiseBuilder(codes, n_bins, edges, max_depth, min_leaf, mtry, rng)

    node_of_row = np.where(w_count > 0, 0, -1).astype(np.int64)
    b._new_node()
    depth = 0
    while True:
        rows = np.flatnonzero(node_of_row >= 0)
        if rows.size == 0:
            break
        node_ids, local = np.unique(node_of_row[rows], return_inverse=True)
        k = node_ids.size
        if w_stat is w_count:  # bootstrap counts double as statistics weights
            hw, hg = b._level_histograms(
                rows, local, k, [w_stat[rows], w_stat[rows] * y_good[rows]]
            )
            hn, hng = hw, hg
        else:
            hw, hg, hn, hng = b._level_histograms(
                rows, local, k,
                [w_stat[rows], w_stat[rows] * y_good[rows], w_count[rows],
                 w_count[rows] * y_good[rows]],
            )
        W = hw.sum(axis=2)[:, 0]
        G = hg.sum(axis=2)[:, 0]
        N = hn.sum(axis=2)[:, 0]
        NGOOD = hng.sum(axis=2)[:, 0]
        for i, nid in enumerate(node_ids):
            b.value[nid] = float(G[i] / W[i]) if W[i] > 0 else 0.5
            b.n_node[nid] = int(round(N[i]))
            b.n_good[nid] = int(round(NGOOD[i]))

        # pure nodes fail the strict impurity-decrease test on their own
        can_split = (depth < max_depth) & (N >= 2 * min_leaf)

        WL = np.cumsum(hw, axis=2)
        GL = np.cumsum(hg, axis=2)
        NL = WL if hn is hw else np.cumsum(hn, axis=2)
        WR = W[:, None, None] - WL
        GR = G[:, None, None] - GL
        NR = N[:, None, None] - NL
        valid = (NL >= min_leaf) & (NR >= min_leaf) & (WL > 0) & (WR > 0)
        valid &= b._valid_bins(k)
        mask = b._mtry_mask(k)
        if mask is not None:
            valid &= mask[:, :, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            child = 2.0 * (GL * (WL - GL) / WL + GR * (WR - GR) / WR)
        child = np.where(valid, child, np.inf)
        flat = child.reshape(k, -1)
        best = np.argmin(flat, axis=1)
        best_score = flat[np.arange(k), best]
        parent = 2.0 * G * (W - G) / np.maximum(W, 1e-300)
        did_split = can_split & (best_score < parent - 1e-12) & np.isfinite(best_score)

        split_feat = (best // b.width).astype(np.int64)
        split_bin = (best % b.width).astype(np.int64)
        child_left = np.full(k, -1, dtype=np.int64)
        child_right = np.full(k, -1, dtype=np.int64)
        for i, nid in enumerate(node_ids):
            if did_split[i]:
                b.feature[nid] = int(split_feat[i])
                b.threshold[nid] = float(edges[split_feat[i]][split_bin[i]])
                child_left[i] = b._new_node()
                child_right[i] = b._new_node()
                b.left[nid] = child_left[i]
                b.right[nid] = child_right[i]
        if not did_split.any():
            node_of_row[rows] = -1
            break
        b._route_rows(rows, local, split_feat, split_bin, did_split,
                      node_of_row, child_left, child_right)
        depth += 1
    return b._finish()


def grow_regression_tree(
    codes: np.ndarray,
    n_bins: np.ndarray,
    grad: np.ndarray,
    hess: np.ndarray,
    rows: np.ndarray,
    edges: list[np.ndarray],
    max_depth: int,
    min_leaf: int,
) -> Tree:
    """Least-squares tree on gradients; leaf value is the Newton step sum(g)/sum(h)."""
    grad = np.asarray(grad, dtype=float)
    hess = np.asarray(hess, dtype=float)
    b = _LevelwiseBuilder(codes, np.asarray(n_bins), edges, max_depth, min_leaf, None, None)
    node_of_row = np.full(codes.shape[0], -1, dtype=np.int64)
    node_of_row[np.asarray(rows)] = 0
    b._new_node()
    depth = 0
    while True:
        active_rows = np.flatnonzero(node_of_row >= 0)
        if active_rows.size == 0:
            break
        node_ids, local = np.unique(node_of_row[active_rows], return_inverse=True)
        k = node_ids.size
        hg, hh, hn = b._level_histograms(
            active_rows, local, k,
            [grad[active_rows], hess[active_rows], np.ones(active_rows.size)],
        )
        G = hg.sum(axis=2)[:, 0]
        H = hh.sum(axis=2)[:, 0]
        N = hn.sum(axis=2)[:, 0]
        for i, nid in enumerate(node_ids):
            b.value[nid] = float(G[i] / H[i]) if H[i] > 1e-12 else 0.0
            b.n_node[nid] = int(N[i])
        can_split = (N >= 2 * min_leaf) & (depth < max_depth)

        GL = np.cumsum(hg, axis=2)
        NL = np.cumsum(hn, axis=2)
        GR = G[:, None, None] - GL
        NR = N[:, None, None] - NL
        valid = (NL >= min_leaf) & (NR >= min_leaf) & b._valid_bins(k)
        with np.errstate(divide="ignore", invalid="ignore"):
            gain = GL * GL / NL + GR * GR / NR
        gain = np.where(valid, gain, -np.inf)
        flat = gain.reshape(k, -1)
        best = np.argmax(flat, axis=1)
        best_gain = flat[np.arange(k), best]
        base = G * G / np.maximum(N, 1e-300)
        did_split = can_split & (best_gain > base + 1e-12) & np.isfinite(best_gain)

        split_feat = (best // b.width).astype(np.int64)
        split_bin = (best % b.width).astype(np.int64)
        child_left = np.full(k, -1, dtype=np.int64)
        child_right = np.full(k, -1, dtype=np.int64)
        for i, nid in enumerate(node_ids):
            if did_split[i]:
                b.feature[nid] = int(split_feat[i])
                b.threshold[nid] = float(edges[split_feat[i]][split_bin[i]])
                child_left[i] = b._new_node()
                child_right[i] = b._new_node()
                b.left[nid] = child_left[i]
                b.right[nid] = child_right[i]
        if not did_split.any():
            break
        b._route_rows(active_rows, local, split_feat, split_bin, did_split,
                      node_of_row, child_left, child_right)
        depth += 1
    return b._finish()


def prune_cost_complexity(tree: Tree, cp: float) -> Tree:
    """Weakest-link pruning: collapse subtrees whose per-leaf risk improvement
    does not exceed cp times the root risk (misclassified training rows)."""
    feature = tree.feature.copy()
    n = feature.size
    mis_leaf = tree.n_node - np.maximum(tree.n_good, tree.n_node - tree.n_good)
    root_risk = float(mis_leaf[0])
    if root_risk <= 0:
        return tree

    def subtree_stats() -> tuple[np.ndarray, np.ndarray]:
        risk = mis_leaf.astype(float).copy()
        leaves = np.ones(n)
        for node in range(n - 1, -1, -1):  # children always follow parents
            if feature[node] != NO_FEATURE:
                l, r = tree.left[node], tree.right[node]
                risk[node] = risk[l] + risk[r]
                leaves[node] = leaves[l] + leaves[r]
        return risk, leaves

    while True:
        risk, leaves = subtree_stats()
        internal = np.flatnonzero(feature != NO_FEATURE)
        if internal.size == 0:
            break
        g = (mis_leaf[internal] - risk[internal]) / (leaves[internal] - 1.0)
        gmin = g.min()
        if gmin > cp * root_risk + 1e-12:
            break
        for node in internal[g <= gmin + 1e-12]:
            _collapse(feature, tree.left, tree.right, node)
    return Tree(feature, tree.threshold, tree.left, tree.right,
                tree.value, tree.n_node, tree.n_good)


def _collapse(feature: np.ndarray, left: np.ndarray, right: np.ndarray, node: int) -> None:
    stack = [node]
    while stack:
        cur = stack.pop()
        if feature[cur] != NO_FEATURE:
            feature[cur] = NO_FEATURE
            stack.extend((int(left[cur]), int(right[cur])))
