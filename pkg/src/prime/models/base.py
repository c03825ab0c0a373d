"""Shared model container and evaluation metrics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class TrainedModel:
    """A fitted estimator with its explanation payload and held-out metrics.

    ``explanation_kind`` is "coefficient" for white-box families (signed
    values) and "importance" for tree ensembles (nonnegative, summing to 1).
    """

    family: str
    hyperparams: dict
    feature_names: list[str]
    predictor: object
    explanation_kind: str
    explanation: dict[str, float]
    metrics: dict[str, float] = field(default_factory=dict)
    target: str | None = None

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.predictor.predict(np.asarray(X, dtype=float))

    def explanation_entries(self) -> list[dict]:
        entries = [{"feature": k, "value": float(v), "kind": self.explanation_kind}
                   for k, v in self.explanation.items()]
        entries.sort(key=lambda e: (-abs(e["value"]), e["feature"]))
        return entries


def metrics_from_predictions(y_true: np.ndarray, y_pred: np.ndarray) -> dict[str, float]:
    resid = np.asarray(y_true, dtype=float) - np.asarray(y_pred, dtype=float)
    mse = float(np.mean(resid**2))
    return {"mse": mse, "rmse": float(np.sqrt(mse)), "mae": float(np.mean(np.abs(resid)))}


def evaluate(model: TrainedModel, X_test: np.ndarray, y_test: np.ndarray) -> dict[str, float]:
    """MSE / RMSE / MAE on a held-out set; also stored on the model."""
    model.metrics = metrics_from_predictions(y_test, model.predict(X_test))
    return model.metrics
