"""Linear log-odds baseline trained by full-batch gradient descent."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InputDomainError
from .ensemble import sigmoid


@dataclass
class LogisticModel:
    weights: np.ndarray      # per standardized feature
    bias: float
    mean: np.ndarray
    scale: np.ndarray
    n_features: int
    schema_fingerprint: str | None = None


def logistic_baseline_train(samples, labels, epochs: int = 300,
                            step: float = 0.1,
                            schema_fingerprint: str | None = None
                            ) -> LogisticModel:
    """Deterministic logistic regression from zero-initialized weights.

    Features are standardized internally (constant columns are left
    unscaled); zero epochs returns the untrained model, which predicts
    class 0 everywhere because probability 0.5 is not above threshold.
    """
    X = np.asarray(samples, dtype=float)
    y = np.asarray(labels, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise InputDomainError("samples and labels must align")
    if epochs < 0 or step <= 0:
        raise InputDomainError("epochs must be >= 0 and step positive")
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0.0] = 1.0
    Xs = (X - mean) / scale

    n = y.size
    w = np.zeros(X.shape[1])
    b = 0.0
    for _ in range(epochs):
        p = sigmoid(Xs @ w + b)
        err = p - y
        w -= step * (Xs.T @ err) / n
        b -= step * float(err.mean())
    return LogisticModel(weights=w, bias=b, mean=mean, scale=scale,
                         n_features=X.shape[1],
                         schema_fingerprint=schema_fingerprint)


def logistic_predict_proba(model: LogisticModel, v):
    v = np.asarray(v, dtype=float)
    single = v.ndim == 1
    if single:
        v = v[None, :]
    z = ((v - model.mean) / model.scale) @ model.weights + model.bias
    p = sigmoid(z)
    return float(p[0]) if single else p


def logistic_predict(model: LogisticModel, v):
    p = logistic_predict_proba(model, v)
    if isinstance(p, float):
        return int(p > 0.5)
    return (p > 0.5).astype(np.int64)
