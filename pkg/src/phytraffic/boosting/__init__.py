"""From-scratch tree learners: CART, random forest, gradient boosting,
and the logistic baseline, plus split search and model persistence."""
from .ensemble import (BoostedModel, CartModel, ForestModel,
                       feature_importance, gbdt_margin, gbdt_predict,
                       gbdt_predict_proba, gbdt_round, gbdt_score_one,
                       gbdt_train, init_log_odds, rf_predict,
                       rf_predict_proba, rf_train, sigmoid)
from .linear import (LogisticModel, logistic_baseline_train, logistic_predict,
                     logistic_predict_proba)
from .model_io import load_model, save_model
from .splits import (MIN_GAIN, Histogram, Split, best_split_exact,
                     best_split_hist, build_histogram, capped_edges, gini,
                     midpoint_edges)
from .tree import (EPS, FlatTree, GrowthState, TreeNode, TreeParams,
                   cart_train, grow_leafwise)

import numpy as np

from ..errors import InputDomainError


def predict_proba_batch(model, X) -> np.ndarray:
    """Positive-class probabilities for any trained model kind."""
    X = np.asarray(X, dtype=float)
    if isinstance(model, BoostedModel):
        return gbdt_predict_proba(model, X)
    if isinstance(model, ForestModel):
        return rf_predict_proba(model, X)
    if isinstance(model, CartModel):
        return model.flat_trees()[0].apply(X)
    if isinstance(model, LogisticModel):
        return logistic_predict_proba(model, X)
    raise InputDomainError(f"unknown model type {type(model).__name__}")


def predict_batch(model, X) -> np.ndarray:
    """Class labels (1 iff probability > 0.5) for any trained model kind."""
    return (predict_proba_batch(model, X) > 0.5).astype(np.int64)


def predict_one(model, x) -> tuple[int, float]:
    """(label, probability) for one sample; x may be a list for speed."""
    if isinstance(model, BoostedModel):
        p = float(sigmoid(gbdt_score_one(model, x)))
    elif isinstance(model, ForestModel):
        p = sum(t.predict_one(x) for t in model.trees) / len(model.trees)
    elif isinstance(model, CartModel):
        p = model.tree.predict_one(x)
    elif isinstance(model, LogisticModel):
        p = logistic_predict_proba(model, np.asarray(x, dtype=float))
    else:
        raise InputDomainError(f"unknown model type {type(model).__name__}")
    return int(p > 0.5), p


__all__ = [
    "BoostedModel", "CartModel", "ForestModel", "FlatTree", "GrowthState",
    "Histogram", "LogisticModel", "MIN_GAIN", "EPS", "Split", "TreeNode",
    "TreeParams", "best_split_exact", "best_split_hist", "build_histogram",
    "capped_edges", "cart_train", "feature_importance", "gbdt_margin",
    "gbdt_predict", "gbdt_predict_proba", "gbdt_round", "gbdt_score_one",
    "gbdt_train", "gini", "grow_leafwise", "init_log_odds", "load_model",
    "logistic_baseline_train", "logistic_predict", "logistic_predict_proba",
    "midpoint_edges", "predict_batch", "predict_one", "predict_proba_batch",
    "rf_predict", "rf_predict_proba", "rf_train", "save_model", "sigmoid",
]
