"""CART classification tree with Gini impurity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LEAF = -1


@dataclass
class DecisionTree:
    """Array-encoded binary tree. Node 0 is the root; leaves have ``feature == -1``.

    ``value[i]`` holds the training class counts that reached node ``i``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    max_depth: int | None
    min_samples_leaf: int

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature == LEAF))

    def depth(self) -> int:
        def rec(i):
            if self.feature[i] == LEAF:
                return 0
            return 1 + max(rec(self.left[i]), rec(self.right[i]))

        return rec(0)

    def apply(self, X) -> np.ndarray:
        """Leaf index reached by each row."""
        X = np.asarray(X, dtype=np.float64)
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] != LEAF
        while active.any():
            idx = np.flatnonzero(active)
            cur = node[idx]
            go_left = X[idx, self.feature[cur]] <= self.threshold[cur]
            node[idx] = np.where(go_left, self.left[cur], self.right[cur])
            active = self.feature[node] != LEAF
        return node

    def predict_proba(self, X) -> np.ndarray:
        v = self.value[self.apply(X)]
        return v / v.sum(axis=1, keepdims=True)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.value[self.apply(X)], axis=1)


def gini(counts) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return float(1.0 - np.sum(p * p))


def best_split(X: np.ndarray, y: np.ndarray, n_classes: int, min_samples_leaf: int = 1):
    """Exhaustive search over ``(feature, midpoint)`` minimizing weighted Gini.

    Returns ``(feature, threshold, weighted_impurity)`` or ``None``. Ties go to
    the lowest feature index, then the lowest threshold.
    """
    m, f = X.shape
    if m < 2 * min_samples_leaf or f == 0:
        return None
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    onehot = np.eye(n_classes)[y]
    left = np.cumsum(onehot[order], axis=0)[:-1]  # (m-1, f, k): rows 0..i on the left
    total = onehot.sum(axis=0)
    right = total - left
    n_left = np.arange(1, m, dtype=np.float64)[:, None]
    n_right = m - n_left
    imp = (n_left - (left**2).sum(axis=2) / n_left) + (n_right - (right**2).sum(axis=2) / n_right)
    valid = xs[1:] > xs[:-1]
    valid &= (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)
    if not valid.any():
        return None
    imp = np.where(valid, imp, np.inf)
    best_per_feature = imp.min(axis=0)
    best = best_per_feature.min()
    # tolerance so float noise does not break the feature/threshold tie order
    feat = int(np.flatnonzero(best_per_feature <= best + 1e-9)[0])
    pos = int(np.flatnonzero(imp[:, feat] <= best + 1e-9)[0])
    thr = 0.5 * (xs[pos, feat] + xs[pos + 1, feat])
    if not xs[pos, feat] <= thr < xs[pos + 1, feat]:
        thr = xs[pos, feat]
    return feat, float(thr), float(imp[pos, feat]) / m


def fit_tree(X, y, n_classes: int | None = None, max_depth: int | None = 12, min_samples_leaf: int = 2) -> DecisionTree:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("fit_tree needs a non-empty 2-D sample matrix")
    if y.shape != (X.shape[0],):
        raise ValueError("X and y have different lengths")
    k = n_classes if n_classes is not None else int(y.max()) + 1
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(counts):
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(counts)
        return len(feature) - 1

    stack = [(np.arange(X.shape[0]), 0, new_node(np.bincount(y, minlength=k).astype(np.float64)))]
    while stack:
        idx, depth, nid = stack.pop()
        counts = value[nid]
        if (max_depth is not None and depth >= max_depth) or np.count_nonzero(counts) <= 1:
            continue
        found = best_split(X[idx], y[idx], k, min_samples_leaf)
        if found is None:
            continue
        feat, thr, _ = found
        mask = X[idx, feat] <= thr
        li, ri = idx[mask], idx[~mask]
        feature[nid] = feat
        threshold[nid] = thr
        left[nid] = new_node(np.bincount(y[li], minlength=k).astype(np.float64))
        right[nid] = new_node(np.bincount(y[ri], minlength=k).astype(np.float64))
        stack.append((ri, depth + 1, right[nid]))
        stack.append((li, depth + 1, left[nid]))

    return DecisionTree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value, dtype=np.float64).reshape(len(value), k),
        max_depth=max_depth,
        min_samples_leaf=min_samples_leaf,
    )
