from .base import TrainedModel, evaluate, metrics_from_predictions
from .linear import (
    fit_lasso,
    fit_linear,
    fit_polynomial,
    fit_ridge,
    lasso_critical_alpha,
    polynomial_expand,
)
from .trees import fit_gbt, fit_random_forest
from .tuning import DEFAULT_GRIDS, FAMILIES, ModelSpec, fit_family, run_model_suite, tune

__all__ = [
    "TrainedModel", "evaluate", "metrics_from_predictions",
    "fit_linear", "fit_ridge", "fit_lasso", "fit_polynomial",
    "lasso_critical_alpha", "polynomial_expand",
    "fit_random_forest", "fit_gbt",
    "ModelSpec", "tune", "fit_family", "run_model_suite",
    "DEFAULT_GRIDS", "FAMILIES",
]
