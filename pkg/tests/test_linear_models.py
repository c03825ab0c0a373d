import numpy as np
import pytest

from prime.errors import DataError
from prime.models import (
    fit_lasso,
    fit_linear,
    fit_polynomial,
    fit_ridge,
    lasso_critical_alpha,
    polynomial_expand,
)


def normal_equations_oracle(X, y):
    """Independent OLS route: solve X'X beta = X'y directly."""
    Xc = np.column_stack([np.ones(len(y)), X])
    return np.linalg.solve(Xc.T @ Xc, Xc.T @ y)


def ridge_closed_form_oracle(X, y, alpha):
    """(Xc'Xc + alpha I)^-1 Xc'yc on centered data, intercept unpenalized."""
    xm, ym = X.mean(axis=0), y.mean()
    Xc, yc = X - xm, y - ym
    coef = np.linalg.solve(Xc.T @ Xc + alpha * np.eye(X.shape[1]), Xc.T @ yc)
    return coef, ym - xm @ coef


class TestLinear:
    def test_exact_line(self):
        x = np.linspace(0, 4, 5).reshape(-1, 1)
        model = fit_linear(x, 2 * x[:, 0])
        assert model.predictor.coef[0] == pytest.approx(2.0, abs=1e-12)
        assert model.predictor.intercept == pytest.approx(0.0, abs=1e-12)
        assert np.max(np.abs(model.predict(x) - 2 * x[:, 0])) <= 1e-12

    def test_constant_target(self):
        x = np.arange(5.0).reshape(-1, 1)
        model = fit_linear(x, np.full(5, 3.0))
        assert model.predictor.coef[0] == pytest.approx(0.0, abs=1e-12)
        assert model.predictor.intercept == pytest.approx(3.0, abs=1e-12)

    def test_two_feature_plane(self):
        rng = np.random.Generator(np.random.PCG64(1))
        X = rng.uniform(-1, 1, size=(6, 2))
        y = X[:, 0] - X[:, 1] + 1
        model = fit_linear(X, y)
        assert model.predictor.coef == pytest.approx([1.0, -1.0], abs=1e-9)
        assert model.predictor.intercept == pytest.approx(1.0, abs=1e-9)

    def test_matches_normal_equations_oracle(self):
        rng = np.random.Generator(np.random.PCG64(2))
        for _ in range(5):
            X = rng.uniform(-2, 2, size=(9, 3))
            y = rng.uniform(-1, 1, size=9)
            beta = normal_equations_oracle(X, y)
            model = fit_linear(X, y)
            assert model.predictor.intercept == pytest.approx(beta[0], abs=1e-9)
            assert model.predictor.coef == pytest.approx(beta[1:], abs=1e-9)

    def test_residual_orthogonality(self):
        rng = np.random.Generator(np.random.PCG64(3))
        X = rng.uniform(0, 1, size=(20, 4))
        y = rng.uniform(0, 1, size=20)
        model = fit_linear(X, y)
        resid = y - model.predict(X)
        scale = max(1.0, np.abs(X.T @ y).max())
        assert np.max(np.abs(X.T @ resid)) <= 1e-8 * scale

    def test_rank_deficiency_names_column(self):
        x = np.arange(6.0)
        X = np.column_stack([x, 2 * x])
        with pytest.raises(DataError, match="b"):
            fit_linear(X, x, feature_names=["a", "b"])

    def test_more_features_than_rows(self):
        with pytest.raises(DataError, match="more rows"):
            fit_linear(np.ones((3, 3)), np.ones(3))


class TestRidge:
    def test_alpha_zero_is_ols(self):
        x = np.linspace(0, 4, 5).reshape(-1, 1)
        model = fit_ridge(x, 2 * x[:, 0], alpha=0.0)
        assert model.predictor.coef[0] == pytest.approx(2.0, abs=1e-9)

    def test_huge_alpha_shrinks_to_mean(self):
        rng = np.random.Generator(np.random.PCG64(4))
        X = rng.uniform(-1, 1, size=(12, 2))
        X -= X.mean(axis=0)
        y = rng.uniform(0, 4, size=12)
        model = fit_ridge(X, y, alpha=1e9)
        assert np.max(np.abs(model.predictor.coef)) <= 1e-6
        assert model.predictor.intercept == pytest.approx(y.mean(), abs=1e-6)

    def test_closed_form_oracle_three_points(self):
        X = np.array([[0.0], [1.0], [2.0]])
        y = np.array([0.0, 1.0, 3.0])
        coef, intercept = ridge_closed_form_oracle(X, y, alpha=1.0)
        model = fit_ridge(X, y, alpha=1.0)
        assert model.predictor.coef == pytest.approx(coef, abs=1e-9)
        assert model.predictor.intercept == pytest.approx(intercept, abs=1e-9)

    def test_closed_form_oracle_random(self):
        rng = np.random.Generator(np.random.PCG64(5))
        X = rng.uniform(-1, 1, size=(10, 3))
        y = rng.uniform(-1, 1, size=10)
        for alpha in (1e-3, 0.1, 1.0, 10.0):
            coef, intercept = ridge_closed_form_oracle(X, y, alpha)
            model = fit_ridge(X, y, alpha=alpha)
            assert model.predictor.coef == pytest.approx(coef, abs=1e-9)
            assert model.predictor.intercept == pytest.approx(intercept, abs=1e-9)


class TestLasso:
    def test_critical_alpha_gives_exact_zeros(self):
        rng = np.random.Generator(np.random.PCG64(6))
        X = rng.uniform(0, 1, size=(15, 4))
        y = rng.uniform(0, 1, size=15)
        alpha = lasso_critical_alpha(X, y)
        for a in (alpha, alpha * 1.5, alpha * 10):
            model = fit_lasso(X, y, alpha=a)
            assert np.all(model.predictor.coef == 0.0)
            assert model.predictor.intercept == pytest.approx(y.mean(), abs=1e-12)

    def test_below_critical_activates(self):
        rng = np.random.Generator(np.random.PCG64(7))
        X = rng.uniform(0, 1, size=(15, 3))
        y = 2 * X[:, 0] + rng.normal(0, 0.01, 15)
        alpha = lasso_critical_alpha(X, y)
        model = fit_lasso(X, y, alpha=alpha * 0.5)
        assert np.any(model.predictor.coef != 0.0)

    def test_alpha_zero_matches_ols(self):
        rng = np.random.Generator(np.random.PCG64(8))
        X = rng.uniform(-1, 1, size=(12, 3))
        y = rng.uniform(-1, 1, size=12)
        ols = fit_linear(X, y)
        lasso = fit_lasso(X, y, alpha=0.0, tol=1e-12, max_iter=100_000)
        assert lasso.predictor.coef == pytest.approx(ols.predictor.coef, abs=1e-6)

    def test_univariate_soft_threshold_closed_form(self):
        rng = np.random.Generator(np.random.PCG64(9))
        x = rng.standard_normal(40)
        x = (x - x.mean()) / x.std()
        y = 1.5 * x + rng.normal(0, 0.1, 40)
        for alpha in (0.05, 0.5, 1.0):
            cov = float(x @ (y - y.mean())) / len(y)
            var = float(x @ x) / len(y)
            expected = np.sign(cov) * max(abs(cov) - alpha, 0.0) / var
            model = fit_lasso(x.reshape(-1, 1), y, alpha=alpha)
            assert model.predictor.coef[0] == pytest.approx(expected, abs=1e-9)

    def test_nonconvergence_reports_gap(self):
        rng = np.random.Generator(np.random.PCG64(10))
        X = rng.uniform(0, 1, size=(10, 2))
        y = rng.uniform(0, 1, size=10)
        with pytest.raises(DataError, match="did not converge"):
            fit_lasso(X, y, alpha=1e-6, max_iter=0)


class TestPolynomial:
    def test_degree_one_equals_linear(self):
        rng = np.random.Generator(np.random.PCG64(11))
        X = rng.uniform(-1, 1, size=(8, 2))
        y = rng.uniform(-1, 1, size=8)
        lin = fit_linear(X, y)
        poly = fit_polynomial(X, y, degree=1)
        assert poly.predictor.coef == pytest.approx(lin.predictor.coef, abs=0)
        assert poly.predictor.intercept == lin.predictor.intercept
        assert np.array_equal(poly.predict(X), lin.predict(X))

    def test_exact_quadratic(self):
        x = np.linspace(-2, 2, 5).reshape(-1, 1)
        y = x[:, 0] ** 2
        model = fit_polynomial(x, y, degree=2)
        assert model.explanation["x0^2"] == pytest.approx(1.0, abs=1e-9)
        assert abs(model.explanation["x0"]) <= 1e-9
        assert np.mean(np.abs(model.predict(x) - y)) <= 1e-9

    def test_expansion_count(self):
        X = np.ones((3, 2))
        expanded, terms = polynomial_expand(X, 2)
        assert expanded.shape[1] == len(terms) == 5  # x1, x2, x1^2, x1x2, x2^2

    def test_interaction_terms_named(self):
        X = np.array([[1.0, 2.0], [2.0, 3.0], [3.0, 5.0], [4.0, 7.0], [0.0, 1.0],
                      [5.0, 2.0]])
        y = X[:, 0] * X[:, 1]
        model = fit_polynomial(X, y, degree=2, feature_names=["u", "v"])
        assert "u*v" in model.explanation
        assert model.explanation["u*v"] == pytest.approx(1.0, abs=1e-7)
