"""Boosted and bagged ensembles over the tree builders.

The gradient-boosting loop is the textbook binary log-loss recurrence:
start from the training-set log odds, and per round compute probabilities
p = sigmoid(log odds), residuals r = y - p, fit a leaf-wise regression
tree to r, set each leaf to sum(r)/(sum(p*(1-p))+EPS) over its samples,
and advance every sample's log odds by learning_rate times its leaf
value.  Class 1 is predicted iff the final sigmoid exceeds 0.5 strictly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateDataError, InputDomainError
from .splits import bin_index, capped_edges
from .tree import EPS, FlatTree, GrowthState, TreeNode, TreeParams, \
    _PreparedBins, cart_train, grow_leafwise


def sigmoid(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def init_log_odds(labels) -> float:
    """ln(count(y=1) / count(y=0)) over the training labels."""
    y = np.asarray(labels)
    if y.size == 0 or not np.isin(y, (0, 1)).all():
        raise InputDomainError("labels must be a non-empty binary sequence")
    n1 = int(np.sum(y == 1))
    n0 = y.size - n1
    if n0 == 0 or n1 == 0:
        raise DegenerateDataError(
            f"single-class training set ({n1} positive of {y.size}); "
            "boosting cannot start")
    return math.log(n1 / n0)


@dataclass
class BoostedModel:
    init_log_odds: float
    learning_rate: float
    trees: list[TreeNode]
    n_features: int
    params: TreeParams = field(default_factory=TreeParams)
    schema_fingerprint: str | None = None
    train_nll: tuple[float, ...] | None = None

    def __post_init__(self):
        if not 0.0 < self.learning_rate <= 1.0:
            raise InputDomainError(
                f"learning_rate must be in (0, 1], got {self.learning_rate}")
        self._flat = None
        self._lists = None

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def flat_trees(self) -> list[FlatTree]:
        if self._flat is None or len(self._flat) != len(self.trees):
            self._flat = [FlatTree(t) for t in self.trees]
        return self._flat

    def tree_lists(self):
        if self._lists is None or len(self._lists) != len(self.trees):
            self._lists = [f.to_lists() for f in self.flat_trees()]
        return self._lists


@dataclass
class ForestModel:
    trees: list[TreeNode]
    bootstrap_seed: int
    feature_subsample: float
    n_features: int
    max_depth: int = 8
    min_leaf: int = 1
    schema_fingerprint: str | None = None

    def __post_init__(self):
        self._flat = None

    def flat_trees(self) -> list[FlatTree]:
        if self._flat is None or len(self._flat) != len(self.trees):
            self._flat = [FlatTree(t) for t in self.trees]
        return self._flat


@dataclass
class CartModel:
    """Single CART wrapped with the metadata the model file needs."""

    tree: TreeNode
    n_features: int
    max_depth: int = 8
    min_leaf: int = 1
    schema_fingerprint: str | None = None

    def __post_init__(self):
        self._flat = None

    def flat_trees(self) -> list[FlatTree]:
        if self._flat is None:
            self._flat = [FlatTree(self.tree)]
        return self._flat


def _bin_matrix(X: np.ndarray, max_bins: int):
    n_features = X.shape[1]
    edges = [capped_edges(X[:, f], max_bins) for f in range(n_features)]
    binned = np.stack([bin_index(X[:, f], edges[f])
                       for f in range(n_features)])
    return edges, binned


def _leaf_value_lut(leaf_values: dict[int, float]) -> np.ndarray:
    lut = np.zeros(max(leaf_values) + 1)
    for lid, v in leaf_values.items():
        lut[lid] = v
    return lut


def _fit_round(binned, edges, log_odds, y, params: TreeParams, prep=None):
    p = sigmoid(log_odds)
    r = y - p
    h = p * (1.0 - p)
    state = GrowthState(binned=binned, edges=edges, grad=r, hess=h,
                        min_leaf=params.min_leaf, n_jobs=params.n_jobs,
                        prep=prep)
    tree = grow_leafwise(state, params.max_leaves, params.max_depth)
    gamma = _leaf_value_lut(state.leaf_values)[state.leaf_of]
    info = {"p": p, "r": r, "leaf_of": state.leaf_of,
            "leaf_values": dict(state.leaf_values),
            "gain_log": list(state.gain_log)}
    return tree, gamma, info


def gbdt_round(log_odds, labels, samples, tree_params: TreeParams | None = None,
               learning_rate: float = 0.1):
    """One boosting round; returns (fitted tree, updated per-sample log odds)."""
    params = tree_params or TreeParams()
    X = np.asarray(samples, dtype=float)
    y = np.asarray(labels, dtype=float)
    log_odds = np.asarray(log_odds, dtype=float)
    if log_odds.shape != y.shape or X.shape[0] != y.size:
        raise InputDomainError("log_odds, labels and samples must align")
    edges, binned = _bin_matrix(X, params.max_bins)
    tree, gamma, _ = _fit_round(binned, edges, log_odds, y, params)
    return tree, log_odds + learning_rate * gamma


def _nll(log_odds: np.ndarray, y: np.ndarray) -> float:
    return float(np.sum(np.logaddexp(0.0, log_odds) - y * log_odds))


def gbdt_train(samples, labels, n_trees: int = 100,
               learning_rate: float = 0.1,
               tree_params: TreeParams | None = None,
               schema_fingerprint: str | None = None,
               round_trace: list | None = None) -> BoostedModel:
    """Fit n_trees sequential boosting rounds from the base log odds.

    When round_trace is a list, one dict per round is appended with the
    round's p, r, per-sample leaf assignment, leaf values, the updated
    log odds, and the training negative log-likelihood.
    """
    params = tree_params or TreeParams()
    if n_trees < 1:
        raise InputDomainError(f"n_trees must be >= 1, got {n_trees}")
    X = np.asarray(samples, dtype=float)
    y_int = np.asarray(labels)
    if X.ndim != 2 or X.shape[0] != y_int.size:
        raise InputDomainError("samples and labels must align")
    base = init_log_odds(y_int)  # also validates two classes present
    y = y_int.astype(float)

    edges, binned = _bin_matrix(X, params.max_bins)
    prep = _PreparedBins(edges)
    log_odds = np.full(y.size, base)
    trees: list[TreeNode] = []
    nlls = [_nll(log_odds, y)]
    for _ in range(n_trees):
        tree, gamma, info = _fit_round(binned, edges, log_odds, y, params,
                                       prep=prep)
        log_odds = log_odds + learning_rate * gamma
        trees.append(tree)
        nlls.append(_nll(log_odds, y))
        if round_trace is not None:
            round_trace.append({**info, "log_odds": log_odds.copy(),
                                "nll": nlls[-1]})
    model = BoostedModel(init_log_odds=base, learning_rate=learning_rate,
                         trees=trees, n_features=X.shape[1], params=params,
                         schema_fingerprint=schema_fingerprint,
                         train_nll=tuple(nlls))
    return model


def gbdt_margin(model: BoostedModel, X: np.ndarray) -> np.ndarray:
    """Final log odds for a batch of sample vectors."""
    X = np.asarray(X, dtype=float)
    out = np.full(X.shape[0], model.init_log_odds)
    for flat in model.flat_trees():
        out += model.learning_rate * flat.apply(X)
    return out


def gbdt_predict_proba(model: BoostedModel, v):
    v = np.asarray(v, dtype=float)
    if v.ndim == 1:
        return float(sigmoid(gbdt_margin(model, v[None, :]))[0])
    return sigmoid(gbdt_margin(model, v))


def gbdt_predict(model: BoostedModel, v):
    """Class 1 iff predicted probability exceeds 0.5 strictly."""
    p = gbdt_predict_proba(model, v)
    if np.isscalar(p):
        return int(p > 0.5)
    return (p > 0.5).astype(np.int64)


def gbdt_score_one(model: BoostedModel, x) -> float:
    """Single-sample log odds via the plain-list fast path.

    x should support scalar indexing (a list is fastest).
    """
    total = 0.0
    for feat, thr, left, right, val in model.tree_lists():
        i = 0
        f = feat[0]
        while f >= 0:
            i = left[i] if x[f] <= thr[i] else right[i]
            f = feat[i]
        total += val[i]
    return model.init_log_odds + model.learning_rate * total


def rf_train(samples, labels, n_trees: int = 30, seed: int = 0,
             feature_subsample: float = 1.0, bootstrap: bool = True,
             max_depth: int = 8, min_leaf: int = 1,
             max_bins: int = 255) -> ForestModel:
    """Bootstrap-resampled CARTs; deterministic for a fixed seed."""
    if n_trees < 1:
        raise InputDomainError(f"n_trees must be >= 1, got {n_trees}")
    if not 0.0 < feature_subsample <= 1.0:
        raise InputDomainError("feature_subsample must be in (0, 1]")
    X = np.asarray(samples, dtype=float)
    y = np.asarray(labels)
    n, n_features = X.shape
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    trees = []
    for _ in range(n_trees):
        idx = rng.integers(0, n, n) if bootstrap else np.arange(n)
        if feature_subsample < 1.0:
            k = max(1, int(round(feature_subsample * n_features)))
            feats = np.sort(rng.choice(n_features, k, replace=False))
            tree = cart_train(X[idx][:, feats], y[idx], max_depth, min_leaf,
                              max_bins)
            _remap_features(tree, feats)
        else:
            tree = cart_train(X[idx], y[idx], max_depth, min_leaf, max_bins)
        trees.append(tree)
    return ForestModel(trees=trees, bootstrap_seed=seed,
                       feature_subsample=feature_subsample,
                       n_features=n_features, max_depth=max_depth,
                       min_leaf=min_leaf)


def _remap_features(tree: TreeNode, feats: np.ndarray) -> None:
    for node in tree.walk():
        if not node.is_leaf:
            node.feature_index = int(feats[node.feature_index])


def rf_predict_proba(model: ForestModel, v):
    """Exact arithmetic mean of the member trees' leaf proportions."""
    v = np.asarray(v, dtype=float)
    if v.ndim == 1:
        return sum(t.predict_one(v) for t in model.trees) / len(model.trees)
    total = np.zeros(v.shape[0])
    for flat in model.flat_trees():
        total += flat.apply(v)
    return total / len(model.trees)


def rf_predict(model: ForestModel, v):
    p = rf_predict_proba(model, v)
    if np.isscalar(p) or isinstance(p, float):
        return int(p > 0.5)
    return (p > 0.5).astype(np.int64)


def feature_importance(model) -> np.ndarray:
    """Split counts per feature: how many internal nodes test each one."""
    if isinstance(model, BoostedModel):
        trees, n_features = model.trees, model.n_features
    elif isinstance(model, ForestModel):
        trees, n_features = model.trees, model.n_features
    elif isinstance(model, CartModel):
        trees, n_features = [model.tree], model.n_features
    else:
        raise InputDomainError(
            f"feature importance needs a tree model, got {type(model).__name__}")
    counts = np.zeros(n_features, dtype=np.int64)
    for tree in trees:
        for node in tree.walk():
            if not node.is_leaf:
                counts[node.feature_index] += 1
    return counts
