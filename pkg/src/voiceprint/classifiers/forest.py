"""Gini-impurity decision trees and a bootstrap random forest."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..seeding import rng_for
from .base import Classifier, check_fit_input


def gini(counts: np.ndarray) -> np.ndarray:
    """Gini impurity of class-count vectors along the last axis."""
    counts = np.asarray(counts, dtype=np.float64)
    n = counts.sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = counts / n[..., None]
        g = 1.0 - (p * p).sum(axis=-1)
    return np.where(n > 0, g, 0.0)


def best_split(X: np.ndarray, y_idx: np.ndarray, n_classes: int, features: np.ndarray):
    """Best (feature, threshold, weighted child impurity) over midpoints.

    Returns ``None`` when no candidate feature has two distinct values.
    Ties resolve to the earliest feature in ``features`` and then the
    smallest threshold.
    """
    n = X.shape[0]
    sub = X[:, features]
    order = np.argsort(sub, axis=0, kind="stable")
    xs = np.take_along_axis(sub, order, axis=0)
    onehot = np.eye(n_classes)[y_idx]
    left = np.cumsum(onehot[order], axis=0)[:-1]  # (n-1, f, k): first i+1 samples on the left
    total = onehot.sum(axis=0)
    right = total - left
    nl = np.arange(1, n)[:, None]
    score = (nl * gini(left) + (n - nl) * gini(right)) / n
    valid = xs[1:] > xs[:-1]
    score = np.where(valid, score, np.inf)
    if not np.isfinite(score).any():
        return None
    # scan feature-major so ties pick the earliest feature, then lowest threshold
    flat = score.T.ravel()
    pos = int(np.argmin(flat))
    f, i = divmod(pos, n - 1)
    thr = 0.5 * (xs[i, f] + xs[i + 1, f])
    return int(features[f]), float(thr), float(score[i, f])


@dataclass
class Tree:
    feature: np.ndarray  # -1 at leaves
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # class proportions per node

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            idx = np.flatnonzero(active)
            nd = node[idx]
            go_left = X[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] >= 0
        return node

    def proba(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    @property
    def depth(self) -> int:
        depth = {0: 0}
        for i in range(self.feature.size):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return max(depth.values())


def build_tree(X, y_idx, n_classes, max_features, rng: np.random.Generator, max_depth: int | None = None,
               min_samples_split: int = 2) -> Tree:
    d = X.shape[1]
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(rows):
        counts = np.bincount(y_idx[rows], minlength=n_classes)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(counts / counts.sum())
        return len(feature) - 1, counts

    root, counts = new_node(np.arange(X.shape[0]))
    stack = [(root, np.arange(X.shape[0]), 0, counts)]
    while stack:
        nid, rows, depth, counts = stack.pop()
        if (np.count_nonzero(counts) <= 1 or rows.size < min_samples_split
                or (max_depth is not None and depth >= max_depth)):
            continue
        feats = rng.choice(d, size=max_features, replace=False) if max_features < d else np.arange(d)
        split = best_split(X[rows], y_idx[rows], n_classes, feats)
        if split is None:
            continue
        f, thr, _ = split
        mask = X[rows, f] <= thr
        feature[nid], threshold[nid] = f, thr
        lid, lc = new_node(rows[mask])
        rid, rc = new_node(rows[~mask])
        left[nid], right[nid] = lid, rid
        stack.append((rid, rows[~mask], depth + 1, rc))
        stack.append((lid, rows[mask], depth + 1, lc))
    return Tree(np.array(feature), np.array(threshold), np.array(left), np.array(right), np.array(value))


class RandomForestClassifier(Classifier):
    def __init__(self, classes, n_features, trees):
        self.classes = classes
        self.n_features = n_features
        self.trees = trees

    def predict_proba(self, X) -> np.ndarray:
        X = self._check(X)
        return np.mean([t.proba(X) for t in self.trees], axis=0)

    def _predict_index(self, X):
        return np.argmax(self.predict_proba(X), axis=1)


def fit_random_forest(X, y, n_trees: int = 100, max_features: int | None = None, seed: int = 0,
                      max_depth: int | None = None, bootstrap: bool = True) -> RandomForestClassifier:
    """Bootstrap forest of Gini trees; ``max_features`` defaults to floor(sqrt(d))."""
    X, y, classes, yi = check_fit_input(X, y)
    n, d = X.shape
    m = max_features or max(1, math.isqrt(d))
    trees = []
    for t in range(n_trees):
        rng = rng_for(seed, f"forest/tree/{t}")
        rows = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        trees.append(build_tree(X[rows], yi[rows], classes.size, m, rng, max_depth))
    return RandomForestClassifier(classes, d, trees)
