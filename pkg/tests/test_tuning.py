import numpy as np
import pytest

from prime.errors import DataError, ValidationError
from prime.features import AlignedDataset, SplitSpec, TARGETS
from prime.models import (
    ModelSpec,
    evaluate,
    fit_family,
    fit_linear,
    metrics_from_predictions,
    run_model_suite,
    tune,
)
from prime.models.tuning import make_folds


def brute_force_cv(family, grid_points, X, y, k, seed):
    """Independent CV loop: same fold construction, straight-line scoring."""
    perm = np.random.Generator(np.random.PCG64(seed)).permutation(len(y))
    folds = np.array_split(perm, k)
    best, best_mae = None, np.inf
    for params in grid_points:
        maes = []
        for i in range(k):
            test_idx = np.sort(folds[i])
            train_idx = np.sort(np.concatenate([folds[j] for j in range(k) if j != i]))
            model = fit_family(family, X[train_idx], y[train_idx], params, seed=seed)
            pred = model.predict(X[test_idx])
            maes.append(np.mean(np.abs(y[test_idx] - pred)))
        mean_mae = float(np.mean(maes))
        if mean_mae < best_mae:
            best, best_mae = params, mean_mae
    return best, best_mae


def linear_data(n=40, seed=0, noise=0.05):
    rng = np.random.Generator(np.random.PCG64(seed))
    X = rng.uniform(0, 1, size=(n, 3))
    y = 2 * X[:, 0] - X[:, 1] + rng.normal(0, noise, n)
    return X, y


class TestMetrics:
    def test_hand_case(self):
        m = metrics_from_predictions(np.array([1.0, 3.0]), np.array([1.0, 2.0]))
        assert m["mae"] == pytest.approx(0.5, abs=1e-12)
        assert m["mse"] == pytest.approx(0.5, abs=1e-12)
        assert m["rmse"] == pytest.approx(np.sqrt(0.5), abs=1e-12)

    def test_perfect_predictions(self):
        m = metrics_from_predictions(np.array([1.0, 2.0]), np.array([1.0, 2.0]))
        assert m == {"mse": 0.0, "rmse": 0.0, "mae": 0.0}

    def test_rmse_squared_is_mse(self):
        rng = np.random.Generator(np.random.PCG64(1))
        m = metrics_from_predictions(rng.uniform(0, 1, 50), rng.uniform(0, 1, 50))
        assert m["rmse"] ** 2 == pytest.approx(m["mse"], rel=1e-12)

    def test_evaluate_stores_metrics(self):
        X, y = linear_data()
        model = fit_linear(X, y)
        metrics = evaluate(model, X, y)
        assert model.metrics is metrics and metrics["mae"] < 0.1


class TestFolds:
    def test_deterministic_partition(self):
        f1 = make_folds(23, 5, seed=3)
        f2 = make_folds(23, 5, seed=3)
        assert all(np.array_equal(a, b) for a, b in zip(f1, f2))
        assert sorted(np.concatenate(f1)) == list(range(23))

    def test_empty_fold_error(self):
        with pytest.raises(DataError):
            make_folds(3, 5, seed=0)

    def test_k_below_two(self):
        with pytest.raises(ValidationError):
            make_folds(10, 1, seed=0)


class TestTune:
    def test_singleton_grid(self):
        X, y = linear_data()
        best, table = tune(ModelSpec("ridge", grid={"alpha": [0.01]}), X, y)
        assert best == {"alpha": 0.01} and len(table) == 1

    def test_ridge_huge_alpha_loses(self):
        X, y = linear_data()
        best, table = tune(ModelSpec("ridge", grid={"alpha": [0.0, 1e6]}, seed=4),
                           X, y)
        assert best == {"alpha": 0.0}
        assert table[0]["mean_mae"] < table[1]["mean_mae"]

    def test_duplicate_grid_points_first_wins(self):
        X, y = linear_data()
        best, table = tune(ModelSpec("ridge", grid=[{"alpha": 0.1}, {"alpha": 0.1}]),
                           X, y)
        assert best is table[0]["params"]

    def test_matches_brute_force_oracle(self):
        X, y = linear_data(seed=5)
        for family, grid in (
            ("ridge", {"alpha": [1e-4, 1e-2, 1.0, 100.0]}),
            ("lasso", {"alpha": [1e-4, 1e-2, 0.1]}),
            ("polynomial", {"degree": [1, 2]}),
        ):
            spec = ModelSpec(family, grid=grid, cv_folds=5, seed=11)
            best, table = tune(spec, X, y)
            oracle_best, oracle_mae = brute_force_cv(
                family, spec.grid_points(), X, y, 5, 11)
            assert best == oracle_best
            chosen = next(r for r in table if r["params"] == best)
            assert chosen["mean_mae"] == pytest.approx(oracle_mae, rel=1e-12)

    def test_grid_dict_expansion_order(self):
        spec = ModelSpec("random_forest", grid={"n_trees": [5, 10], "min_leaf": [1, 2]})
        points = spec.grid_points()
        assert points == [{"n_trees": 5, "min_leaf": 1}, {"n_trees": 5, "min_leaf": 2},
                          {"n_trees": 10, "min_leaf": 1}, {"n_trees": 10, "min_leaf": 2}]


def tiny_aligned(n=30, seed=1):
    rng = np.random.Generator(np.random.PCG64(seed))
    X = rng.uniform(0, 1, size=(n, 2))
    targets = {
        "vulnerability": X[:, 0] * 0.5 + rng.normal(0, 0.02, n),
        "adaptability": -X[:, 1] + rng.normal(0, 0.02, n),
        "resilience": X[:, 0] - X[:, 1] + rng.normal(0, 0.02, n),
    }
    return AlignedDataset(keys=[(f"{10000 + i}", 2001) for i in range(n)],
                          feature_names=["f1", "f2"], X=X, targets=targets,
                          scaled=True)


SMALL_GRIDS = {
    "linear": {},
    "ridge": {"alpha": [0.0, 0.1]},
    "lasso": {"alpha": [1e-4, 1e-2]},
    "polynomial": {"degree": [1, 2]},
    "random_forest": {"n_trees": [5], "max_depth": [3]},
    "gradient_boosted_trees": {"n_trees": [5], "max_depth": [2]},
}


class TestSuite:
    def test_linear_on_linear_data(self):
        data = tiny_aligned()
        suite = run_model_suite(data, [ModelSpec("linear")], SplitSpec(0.8, 42),
                                targets=("resilience",))
        assert len(suite.rows) == 1
        assert suite.rows[0].metrics["mae"] < 0.05

    def test_full_grid_row_count(self):
        data = tiny_aligned()
        specs = [ModelSpec(f, grid=SMALL_GRIDS[f], cv_folds=3, seed=0)
                 for f in SMALL_GRIDS]
        suite = run_model_suite(data, specs, SplitSpec(0.8, 42))
        assert len(suite.rows) == 6 * 3
        for row in suite.rows:
            assert row.metrics["rmse"] ** 2 == pytest.approx(row.metrics["mse"],
                                                             rel=1e-12)

    def test_suite_determinism(self):
        data = tiny_aligned()
        specs = [ModelSpec("ridge", grid={"alpha": [0.0, 0.1]}, seed=2)]
        s1 = run_model_suite(data, specs, SplitSpec(0.7, 3), targets=TARGETS)
        s2 = run_model_suite(data, specs, SplitSpec(0.7, 3), targets=TARGETS)
        for r1, r2 in zip(s1.rows, s2.rows):
            assert r1.metrics == r2.metrics and r1.explanation == r2.explanation

    def test_unknown_family_rejected(self):
        with pytest.raises(ValidationError):
            run_model_suite(tiny_aligned(), [ModelSpec("svm")], SplitSpec(0.8, 1))
