"""Cross-validated hyperparameter search and the family x target model suite.

Grid points are scored by mean MAE over k deterministic folds; the argmin is
selected with ties broken by grid order.  The winning configuration is then
refit on the full training rows and evaluated on the held-out test rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from ..errors import DataError, ValidationError
from ..features import TARGETS, AlignedDataset, SplitSpec, split
from .base import TrainedModel, evaluate, metrics_from_predictions
from .linear import fit_lasso, fit_linear, fit_polynomial, fit_ridge
from .trees import fit_gbt, fit_random_forest

FAMILIES = ("linear", "ridge", "lasso", "polynomial", "random_forest",
            "gradient_boosted_trees")

# Invented defaults, overridable per run; the upstream method names no grids.
DEFAULT_GRIDS: dict[str, dict] = {
    "linear": {},
    "ridge": {"alpha": [1e-4, 1e-3, 1e-2, 1e-1, 1.0]},
    "lasso": {"alpha": [1e-4, 1e-3, 1e-2, 1e-1, 1.0]},
    "polynomial": {"degree": [1, 2, 3]},
    "random_forest": {"n_trees": [100, 300], "max_depth": [None, 10],
                      "min_leaf": [1, 5]},
    "gradient_boosted_trees": {"n_trees": [100, 300], "learning_rate": [0.05, 0.1],
                               "max_depth": [2, 3]},
}


@dataclass
class ModelSpec:
    family: str
    grid: dict | list | None = None
    cv_folds: int = 5
    seed: int = 0

    def grid_points(self) -> list[dict]:
        grid = self.grid if self.grid is not None else DEFAULT_GRIDS[self.family]
        if isinstance(grid, list):
            points = [dict(g) for g in grid]
        else:
            keys = list(grid.keys())
            points = [dict(zip(keys, combo)) for combo in product(*(grid[k] for k in keys))]
        return points or [{}]


def fit_family(family: str, X, y, params: dict, seed: int = 0,
               feature_names=None, n_jobs: int = 1) -> TrainedModel:
    """Dispatch a single fit for one family with explicit hyperparameters."""
    if family == "linear":
        return fit_linear(X, y, feature_names=feature_names)
    if family == "ridge":
        return fit_ridge(X, y, alpha=params.get("alpha", 1.0), feature_names=feature_names)
    if family == "lasso":
        return fit_lasso(X, y, alpha=params.get("alpha", 1e-3), feature_names=feature_names)
    if family == "polynomial":
        return fit_polynomial(X, y, degree=params.get("degree", 2),
                              feature_names=feature_names)
    if family == "random_forest":
        return fit_random_forest(
            X, y, n_trees=params.get("n_trees", 100),
            max_depth=params.get("max_depth"), min_leaf=params.get("min_leaf", 1),
            features_per_split=params.get("features_per_split"), seed=seed,
            bootstrap=params.get("bootstrap", True), n_jobs=n_jobs,
            feature_names=feature_names)
    if family == "gradient_boosted_trees":
        return fit_gbt(
            X, y, n_trees=params.get("n_trees", 100),
            learning_rate=params.get("learning_rate", 0.1),
            max_depth=params.get("max_depth", 3), min_leaf=params.get("min_leaf", 1),
            seed=seed, n_jobs=n_jobs, feature_names=feature_names)
    raise ValidationError(f"unknown model family {family!r}", field="families")


def make_folds(n: int, k: int, seed: int) -> list[np.ndarray]:
    """Deterministic k-fold assignment by seeded shuffle."""
    if k < 2:
        raise ValidationError(f"cv_folds must be >= 2, got {k}", field="cv_folds")
    perm = np.random.Generator(np.random.PCG64(seed)).permutation(n)
    folds = np.array_split(perm, k)
    if any(len(f) == 0 for f in folds):
        raise DataError(f"cannot form {k} nonempty folds from {n} rows")
    return folds


def tune(spec: ModelSpec, X, y, feature_names=None) -> tuple[dict, list[dict]]:
    """Grid search by mean CV MAE; returns (best params, full CV table)."""
    points = spec.grid_points()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    folds = make_folds(len(y), spec.cv_folds, spec.seed)

    table = []
    best_params, best_mae = None, np.inf
    for params in points:
        fold_maes = []
        for i, fold in enumerate(folds):
            train_idx = np.sort(np.concatenate([f for j, f in enumerate(folds) if j != i]))
            test_idx = np.sort(fold)
            model = fit_family(spec.family, X[train_idx], y[train_idx], params,
                               seed=spec.seed, feature_names=feature_names)
            m = metrics_from_predictions(y[test_idx], model.predict(X[test_idx]))
            fold_maes.append(m["mae"])
        mean_mae = float(np.mean(fold_maes))
        table.append({"params": params, "fold_maes": fold_maes, "mean_mae": mean_mae})
        if mean_mae < best_mae:  # strict: ties keep the earlier grid point
            best_params, best_mae = params, mean_mae
    return best_params, table


@dataclass
class SuiteRow:
    target: str
    family: str
    hyperparams: dict
    metrics: dict[str, float]
    explanation_kind: str
    explanation: list[dict]
    cv_table: list[dict]


@dataclass
class SuiteResult:
    rows: list[SuiteRow] = field(default_factory=list)
    split_spec: SplitSpec | None = None
    n_train: int = 0
    n_test: int = 0

    def row(self, target, family):
        for r in self.rows:
            if r.target == target and r.family == family:
                return r
        raise KeyError((target, family))


def run_model_suite(
    data: AlignedDataset,
    specs: list[ModelSpec],
    split_spec: SplitSpec,
    targets: tuple[str, ...] = TARGETS,
    n_jobs: int = 1,
) -> SuiteResult:
    """Tune, refit, and evaluate every requested family on every target.

    All families share one train/test split so their metrics are comparable.
    """
    for t in targets:
        if t not in TARGETS:
            raise ValidationError(f"unknown target {t!r}", field="targets")
    for spec in specs:
        if spec.family not in FAMILIES:
            raise ValidationError(f"unknown model family {spec.family!r}",
                                  field="families")
    train_idx, test_idx = split(data, split_spec)
    result = SuiteResult(split_spec=split_spec,
                         n_train=len(train_idx), n_test=len(test_idx))
    X_train, X_test = data.X[train_idx], data.X[test_idx]
    for target in targets:
        y = data.targets[target]
        y_train, y_test = y[train_idx], y[test_idx]
        for spec in specs:
            best, table = tune(spec, X_train, y_train, feature_names=data.feature_names)
            model = fit_family(spec.family, X_train, y_train, best, seed=spec.seed,
                               feature_names=data.feature_names, n_jobs=n_jobs)
            model.target = target
            evaluate(model, X_test, y_test)
            result.rows.append(SuiteRow(
                target=target, family=spec.family, hyperparams=best,
                metrics=dict(model.metrics),
                explanation_kind=model.explanation_kind,
                explanation=model.explanation_entries(),
                cv_table=table,
            ))
    return result
