"""White-box regression solvers: OLS, ridge, lasso, polynomial expansion.

OLS solves via QR/SVD least squares (the normal-equations route is reserved
for test oracles).  Ridge solves the augmented least-squares system
[X; sqrt(alpha) I] so the intercept stays unpenalized.  Lasso runs cyclic
coordinate descent on the objective

    (1 / 2n) * ||y - X b - b0||^2 + alpha * ||b||_1

with the intercept profiled out by centering.  Features are expected
pre-scaled by the upstream pipeline and are not re-standardized here.
"""

from __future__ import annotations

from itertools import combinations_with_replacement

import numpy as np

from ..errors import DataError
from .base import TrainedModel


class LinearPredictor:
    def __init__(self, coef, intercept):
        self.coef = np.asarray(coef, dtype=float)
        self.intercept = float(intercept)

    def predict(self, X):
        return X @ self.coef + self.intercept


class PolynomialPredictor(LinearPredictor):
    def __init__(self, coef, intercept, degree, n_base_features):
        super().__init__(coef, intercept)
        self.degree = degree
        self.n_base_features = n_base_features

    def predict(self, X):
        return polynomial_expand(X, self.degree)[0] @ self.coef + self.intercept


def _as_matrix(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise DataError("X must be n x p and y length n")
    return X, y


def _check_rank(X, feature_names):
    n, p = X.shape
    if n <= p:
        raise DataError(f"need more rows ({n}) than features ({p}) for OLS")
    Xc = np.column_stack([np.ones(n), X])
    rank = np.linalg.matrix_rank(Xc)
    if rank < p + 1:
        # name the dependent columns by greedy rank growth
        dependent = []
        base = np.ones((n, 1))
        for j in range(p):
            cand = np.column_stack([base, X[:, j]])
            if np.linalg.matrix_rank(cand) == base.shape[1]:
                dependent.append(feature_names[j] if feature_names else f"x{j}")
            else:
                base = cand
        raise DataError(f"design matrix is rank deficient; dependent column(s): "
                        f"{dependent or 'intercept-collinear set'}")


def fit_linear(X, y, feature_names=None, check_rank=True) -> TrainedModel:
    """Ordinary least squares with intercept."""
    X, y = _as_matrix(X, y)
    names = list(feature_names) if feature_names else [f"x{j}" for j in range(X.shape[1])]
    if check_rank:
        _check_rank(X, names)
    Xc = np.column_stack([np.ones(X.shape[0]), X])
    beta, *_ = np.linalg.lstsq(Xc, y, rcond=None)
    predictor = LinearPredictor(beta[1:], beta[0])
    return TrainedModel(
        family="linear", hyperparams={}, feature_names=names, predictor=predictor,
        explanation_kind="coefficient",
        explanation=dict(zip(names, map(float, beta[1:]))),
    )


def fit_ridge(X, y, alpha: float, feature_names=None) -> TrainedModel:
    """Ridge regression, intercept unpenalized; alpha=0 reproduces OLS."""
    X, y = _as_matrix(X, y)
    if alpha < 0:
        raise DataError(f"ridge alpha must be nonnegative, got {alpha}")
    names = list(feature_names) if feature_names else [f"x{j}" for j in range(X.shape[1])]
    n, p = X.shape
    xm = X.mean(axis=0)
    ym = y.mean()
    Xc, yc = X - xm, y - ym
    aug_X = np.vstack([Xc, np.sqrt(alpha) * np.eye(p)])
    aug_y = np.concatenate([yc, np.zeros(p)])
    coef, *_ = np.linalg.lstsq(aug_X, aug_y, rcond=None)
    intercept = ym - xm @ coef
    return TrainedModel(
        family="ridge", hyperparams={"alpha": alpha}, feature_names=names,
        predictor=LinearPredictor(coef, intercept),
        explanation_kind="coefficient",
        explanation=dict(zip(names, map(float, coef))),
    )


def lasso_critical_alpha(X, y) -> float:
    """Smallest alpha at which the lasso solution is the all-zero vector."""
    X, y = _as_matrix(X, y)
    return float(np.max(np.abs(X.T @ (y - y.mean()))) / X.shape[0])


def fit_lasso(X, y, alpha: float, feature_names=None, tol: float = 1e-7,
              max_iter: int = 10_000) -> TrainedModel:
    """Lasso via cyclic coordinate descent.

    Converged when the largest coefficient change in a sweep drops below
    ``tol``; failing that after ``max_iter`` sweeps is an error.
    """
    X, y = _as_matrix(X, y)
    if alpha < 0:
        raise DataError(f"lasso alpha must be nonnegative, got {alpha}")
    names = list(feature_names) if feature_names else [f"x{j}" for j in range(X.shape[1])]
    n, p = X.shape
    xm = X.mean(axis=0)
    ym = y.mean()
    Xc, yc = X - xm, y - ym
    col_sq = (Xc**2).sum(axis=0) / n

    beta = np.zeros(p)
    resid = yc.copy()  # yc - Xc @ beta
    gap = np.inf
    for _ in range(max_iter):
        gap = 0.0
        for j in range(p):
            if col_sq[j] == 0.0:
                continue
            old = beta[j]
            rho = (Xc[:, j] @ resid) / n + col_sq[j] * old
            new = np.sign(rho) * max(abs(rho) - alpha, 0.0) / col_sq[j]
            if new != old:
                resid += Xc[:, j] * (old - new)
                beta[j] = new
            gap = max(gap, abs(new - old))
        if gap < tol:
            break
    else:
        raise DataError(f"lasso did not converge in {max_iter} sweeps "
                        f"(last max coefficient change {gap:.3e} >= tol {tol:.0e})")

    intercept = ym - xm @ beta
    return TrainedModel(
        family="lasso", hyperparams={"alpha": alpha}, feature_names=names,
        predictor=LinearPredictor(beta, intercept),
        explanation_kind="coefficient",
        explanation=dict(zip(names, map(float, beta))),
    )


def polynomial_expand(X, degree: int):
    """All monomials of the columns of X up to ``degree`` (interactions included).

    Returns (expanded matrix, term index tuples); no bias column.
    """
    X = np.asarray(X, dtype=float)
    if degree < 1:
        raise DataError(f"polynomial degree must be >= 1, got {degree}")
    p = X.shape[1]
    terms = []
    for d in range(1, degree + 1):
        terms.extend(combinations_with_replacement(range(p), d))
    cols = [np.prod(X[:, list(t)], axis=1) for t in terms]
    return np.column_stack(cols) if cols else X[:, :0], terms


def _term_name(term, names):
    parts = []
    for j in sorted(set(term)):
        k = term.count(j)
        parts.append(names[j] if k == 1 else f"{names[j]}^{k}")
    return "*".join(parts)


def fit_polynomial(X, y, degree: int, feature_names=None) -> TrainedModel:
    """Polynomial regression: monomial expansion followed by OLS."""
    X, y = _as_matrix(X, y)
    names = list(feature_names) if feature_names else [f"x{j}" for j in range(X.shape[1])]
    Xp, terms = polynomial_expand(X, degree)
    term_names = [_term_name(t, names) for t in terms]
    base = fit_linear(Xp, y, feature_names=term_names, check_rank=False)
    predictor = PolynomialPredictor(base.predictor.coef, base.predictor.intercept,
                                    degree, X.shape[1])
    return TrainedModel(
        family="polynomial", hyperparams={"degree": degree}, feature_names=names,
        predictor=predictor,
        explanation_kind="coefficient",
        explanation=dict(zip(term_names, map(float, base.predictor.coef))),
    )
