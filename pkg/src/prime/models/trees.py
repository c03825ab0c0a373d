"""CART regression trees, bagged forests, and least-squares gradient boosting.

Splits maximize variance reduction (SSE of the node minus the SSE of the two
children).  Ties break on the lowest feature index, then the lowest threshold,
so a fit is bit-reproducible.  Randomness (bootstrap rows, feature subsets)
comes from per-tree generators spawned deterministically from the master
seed, which makes results independent of how many worker threads build the
trees.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from .base import TrainedModel

_NO_DEPTH_LIMIT = 1 << 30


@dataclass
class _Node:
    value: float
    feature: int = -1
    threshold: float = 0.0
    left: "_Node | None" = None
    right: "_Node | None" = None

    @property
    def is_leaf(self):
        return self.left is None


def _best_split_for_feature(x, y, min_leaf):
    """Best (reduction, threshold) for one feature, or None if no valid split."""
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    n = len(ys)
    csum = np.cumsum(ys)
    csq = np.cumsum(ys * ys)
    total_sum, total_sq = csum[-1], csq[-1]
    node_sse = total_sq - total_sum * total_sum / n

    left_n = np.arange(1, n)
    boundary = xs[:-1] != xs[1:]
    valid = boundary & (left_n >= min_leaf) & ((n - left_n) >= min_leaf)
    if not valid.any():
        return None
    ls, lq = csum[:-1], csq[:-1]
    left_sse = lq - ls * ls / left_n
    rs, rq = total_sum - ls, total_sq - lq
    right_sse = rq - rs * rs / (n - left_n)
    reduction = np.where(valid, node_sse - left_sse - right_sse, -np.inf)
    i = int(np.argmax(reduction))  # first max -> lowest threshold
    return float(reduction[i]), float((xs[i] + xs[i + 1]) / 2.0)


def _build(X, y, depth, max_depth, min_leaf, rng, features_per_split,
           importances, executor):
    node = _Node(value=float(y.mean()))
    n, p = X.shape
    node_sse = float(((y - y.mean()) ** 2).sum())
    if depth >= max_depth or n < 2 * min_leaf or n < 2 or node_sse <= 0.0:
        return node

    if features_per_split is not None and features_per_split < p:
        feats = np.sort(rng.choice(p, size=features_per_split, replace=False))
    else:
        feats = np.arange(p)

    if executor is not None:
        per_feature = list(executor.map(
            lambda j: _best_split_for_feature(X[:, j], y, min_leaf), feats))
    else:
        per_feature = [_best_split_for_feature(X[:, j], y, min_leaf) for j in feats]

    best = None  # (reduction, feature, threshold)
    for j, res in zip(feats, per_feature):
        if res is None:
            continue
        reduction, threshold = res
        if best is None or reduction > best[0]:
            best = (reduction, int(j), threshold)
    if best is None:
        return node

    reduction, feature, threshold = best
    importances[feature] += max(reduction, 0.0)
    mask = X[:, feature] <= threshold
    node.feature, node.threshold = feature, threshold
    node.left = _build(X[mask], y[mask], depth + 1, max_depth, min_leaf, rng,
                       features_per_split, importances, executor)
    node.right = _build(X[~mask], y[~mask], depth + 1, max_depth, min_leaf, rng,
                        features_per_split, importances, executor)
    return node


def _predict_node(node, X, out, idx):
    if node.is_leaf:
        out[idx] = node.value
        return
    mask = X[idx, node.feature] <= node.threshold
    _predict_node(node.left, X, out, idx[mask])
    _predict_node(node.right, X, out, idx[~mask])


class RegressionTree:
    """A single fitted CART regression tree."""

    def __init__(self, X, y, max_depth=None, min_leaf=1, rng=None,
                 features_per_split=None, importances=None, executor=None):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if importances is None:
            importances = np.zeros(X.shape[1])
        self.importances = importances
        self.root = _build(
            X, y, 0, _NO_DEPTH_LIMIT if max_depth is None else max_depth,
            min_leaf, rng, features_per_split, importances, executor)

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        out = np.empty(X.shape[0])
        _predict_node(self.root, X, out, np.arange(X.shape[0]))
        return out


class ForestPredictor:
    def __init__(self, trees):
        self.trees = trees

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        acc = np.zeros(X.shape[0])
        for tree in self.trees:  # fixed accumulation order: tree index
            acc += tree.predict(X)
        return acc / len(self.trees)


class GbtPredictor:
    def __init__(self, base, learning_rate, trees, staged_train_mse):
        self.base = base
        self.learning_rate = learning_rate
        self.trees = trees
        self.staged_train_mse = staged_train_mse

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        acc = np.full(X.shape[0], self.base)
        for tree in self.trees:
            acc += self.learning_rate * tree.predict(X)
        return acc


def _normalized_importances(raw):
    total = raw.sum()
    return raw / total if total > 0 else np.zeros_like(raw)


def fit_random_forest(X, y, n_trees=100, max_depth=None, min_leaf=1,
                      features_per_split=None, seed=0, bootstrap=True,
                      n_jobs=1, feature_names=None) -> TrainedModel:
    """Bootstrap-aggregated CART trees with variance-reduction importances."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if min_leaf >= n:
        raise DataError(f"min_leaf={min_leaf} must be smaller than n_train={n}")
    names = list(feature_names) if feature_names else [f"x{j}" for j in range(p)]
    children = np.random.SeedSequence(seed).spawn(n_trees)

    def build_one(child):
        rng = np.random.Generator(np.random.PCG64(child))
        if bootstrap:
            rows = rng.integers(0, n, size=n)
            Xb, yb = X[rows], y[rows]
        else:
            Xb, yb = X, y
        imp = np.zeros(p)
        tree = RegressionTree(Xb, yb, max_depth=max_depth, min_leaf=min_leaf,
                              rng=rng, features_per_split=features_per_split,
                              importances=imp)
        return tree, imp

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            built = list(pool.map(build_one, children))
    else:
        built = [build_one(c) for c in children]

    trees = [t for t, _ in built]
    raw = np.sum([imp for _, imp in built], axis=0)
    return TrainedModel(
        family="random_forest",
        hyperparams={"n_trees": n_trees, "max_depth": max_depth, "min_leaf": min_leaf,
                     "features_per_split": features_per_split, "seed": seed,
                     "bootstrap": bootstrap},
        feature_names=names,
        predictor=ForestPredictor(trees),
        explanation_kind="importance",
        explanation=dict(zip(names, map(float, _normalized_importances(raw)))),
    )


def fit_gbt(X, y, n_trees=100, learning_rate=0.1, max_depth=3, min_leaf=1,
            seed=0, n_jobs=1, feature_names=None) -> TrainedModel:
    """Stagewise least-squares boosting of depth-limited CART trees.

    The base prediction is mean(y); each stage fits a tree to the current
    residuals and adds ``learning_rate`` times its output.  The fit itself is
    deterministic (no row or feature subsampling); n_jobs only parallelizes
    the per-feature split search.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if min_leaf >= n:
        raise DataError(f"min_leaf={min_leaf} must be smaller than n_train={n}")
    if not 0.0 < learning_rate <= 1.0:
        raise DataError(f"learning_rate must be in (0, 1], got {learning_rate}")
    names = list(feature_names) if feature_names else [f"x{j}" for j in range(p)]

    base = float(y.mean())
    current = np.full(n, base)
    trees = []
    importances = np.zeros(p)
    staged_mse = []
    executor = ThreadPoolExecutor(max_workers=n_jobs) if n_jobs > 1 else None
    try:
        for _ in range(n_trees):
            resid = y - current
            tree = RegressionTree(X, resid, max_depth=max_depth, min_leaf=min_leaf,
                                  rng=None, features_per_split=None,
                                  importances=importances, executor=executor)
            current = current + learning_rate * tree.predict(X)
            trees.append(tree)
            staged_mse.append(float(np.mean((y - current) ** 2)))
    finally:
        if executor is not None:
            executor.shutdown()

    return TrainedModel(
        family="gradient_boosted_trees",
        hyperparams={"n_trees": n_trees, "learning_rate": learning_rate,
                     "max_depth": max_depth, "min_leaf": min_leaf, "seed": seed},
        feature_names=names,
        predictor=GbtPredictor(base, learning_rate, trees, staged_mse),
        explanation_kind="importance",
        explanation=dict(zip(names, map(float, _normalized_importances(importances)))),
    )
