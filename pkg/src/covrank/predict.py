"""
Scoring unseen items from their covariates with a fitted model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ComparisonGraph, DataError, FeatureTable, count_upsets, sort_descending
from .kernels import kernel_matrix
from .rankers import KERNEL_MODEL, LINEAR_MODEL, FittedModel


@dataclass(frozen=True)
class PredictionResult:
    scores: np.ndarray
    ordering: np.ndarray
    combined_ordering: np.ndarray | None = None


def _design(model: FittedModel, Phi_new) -> np.ndarray:
    if isinstance(Phi_new, FeatureTable):
        cols = list(model.feature_columns) or list(Phi_new.predictive_columns)
        X = Phi_new.Phi[:, cols]
    else:
        X = np.asarray(Phi_new, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
    width = len(model.beta) if model.kind == LINEAR_MODEL else model.train_features.shape[1]
    if X.ndim != 2 or X.shape[1] != width:
        raise DataError(f"model expects {width} feature columns, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise DataError("feature matrix has non-finite entries")
    return X


def predict_scores(model: FittedModel, Phi_new) -> np.ndarray:
    """Oriented scores of new items (larger is better)."""
    X = _design(model, Phi_new)
    if model.kind == LINEAR_MODEL:
        if model.feature_mean is None:
            raise DataError("linear model is missing the training feature mean")
        return (X - model.feature_mean) @ model.beta
    if model.kind == KERNEL_MODEL:
        if model.kernel is None or model.kernel_col_means is None:
            raise DataError("kernel model is missing its training statistics")
        Kx = kernel_matrix(model.train_features, model.kernel, Y=X)
        return (Kx.T - model.kernel_col_means) @ model.alpha
    raise DataError(f"cannot predict with model kind {model.kind!r}")


def predict_unseen(model: FittedModel, Phi_new) -> PredictionResult:
    """Score and order unseen items; also rank them together with the training items.

    In ``combined_ordering`` training items keep their indices ``0..n-1`` and
    new items are numbered ``n..n+m-1``.
    """
    scores = predict_scores(model, Phi_new)
    combined = None
    if model.train_scores is not None:
        combined = sort_descending(np.concatenate([model.train_scores, scores]))
    return PredictionResult(scores, sort_descending(scores), combined)


def predict_upset_fraction(g_test: ComparisonGraph, pred: PredictionResult) -> float:
    """Fraction of observed pairs among the unseen items contradicted by the prediction."""
    if g_test.n != len(pred.scores):
        raise DataError(f"test graph has {g_test.n} items, prediction has {len(pred.scores)}")
    m = g_test.n_observed()
    if m == 0:
        raise DataError("no observed comparisons among the test items")
    return count_upsets(g_test, pred.scores) / m
