"""Decision-tree construction: recursive Gini CART and the leaf-wise
regression-tree engine used inside boosting.

Both builders discretize each feature once up front (capped_edges) and
search splits over bin boundaries, so split decisions coincide with the
exact midpoint search whenever the bin budget covers the distinct values.
A sample routes left iff its feature value is <= the node threshold.
"""
from __future__ import annotations

import heapq
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from ..errors import InputDomainError
from .splits import (MIN_GAIN, Split, _best_over_features, _scan_edges,
                     bin_index, capped_edges)

# Keeps leaf-value ratios finite when a leaf's hessian mass vanishes.
EPS = 1e-12


@dataclass
class TreeNode:
    """Internal node (feature_index >= 0) or leaf (feature_index == -1)."""

    feature_index: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    value: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.feature_index < 0

    def predict_one(self, x) -> float:
        node = self
        while not node.is_leaf:
            node = node.left if x[node.feature_index] <= node.threshold \
                else node.right
        return node.value

    def walk(self) -> Iterator["TreeNode"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            if not node.is_leaf:
                stack.append(node.right)
                stack.append(node.left)

    def n_leaves(self) -> int:
        return sum(1 for n in self.walk() if n.is_leaf)

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())


@dataclass(frozen=True)
class TreeParams:
    """Knobs shared by the boosting tree builder."""

    max_leaves: int = 31
    max_depth: int = 8
    max_bins: int = 255
    min_leaf: int = 20
    n_jobs: int = 1


class FlatTree:
    """Array form of a tree for vectorized batch application."""

    def __init__(self, root: TreeNode):
        feat, thr, left, right, val = [], [], [], [], []

        def add(node: TreeNode) -> int:
            i = len(feat)
            feat.append(node.feature_index)
            thr.append(node.threshold)
            left.append(-1)
            right.append(-1)
            val.append(node.value)
            if not node.is_leaf:
                left[i] = add(node.left)
                right[i] = add(node.right)
            return i

        add(root)
        self.feature = np.array(feat, dtype=np.int64)
        self.threshold = np.array(thr)
        self.left = np.array(left, dtype=np.int64)
        self.right = np.array(right, dtype=np.int64)
        self.value = np.array(val)

    def apply(self, X: np.ndarray) -> np.ndarray:
        pos = np.zeros(X.shape[0], dtype=np.int64)
        active = np.nonzero(self.feature[pos] >= 0)[0]
        while active.size:
            cur = pos[active]
            go_left = X[active, self.feature[cur]] <= self.threshold[cur]
            pos[active] = np.where(go_left, self.left[cur], self.right[cur])
            active = active[self.feature[pos[active]] >= 0]
        return self.value[pos]

    def to_lists(self):
        """Plain-list form for the low-latency single-sample path."""
        return (self.feature.tolist(), self.threshold.tolist(),
                self.left.tolist(), self.right.tolist(),
                self.value.tolist())


def cart_train(samples, labels, max_depth: int = 8, min_leaf: int = 1,
               max_bins: int = 255) -> TreeNode:
    """Recursive Gini CART; leaf value = positive-class proportion.

    Impure nodes are split even at zero gain (when a valid candidate
    exists), so equal-gain layouts such as parity patterns still resolve
    within the depth budget.
    """
    X = np.asarray(samples, dtype=float)
    y = np.asarray(labels)
    if X.ndim != 2 or X.shape[0] == 0:
        raise InputDomainError("training set must be a non-empty 2-d matrix")
    if y.shape != (X.shape[0],) or not np.isin(y, (0, 1)).all():
        raise InputDomainError("labels must be one binary value per sample")
    if max_depth < 1 or min_leaf < 1:
        raise InputDomainError("max_depth and min_leaf must be positive")
    y = y.astype(float)
    n, n_features = X.shape
    edges = [capped_edges(X[:, f], max_bins) for f in range(n_features)]
    binned = np.stack([bin_index(X[:, f], edges[f])
                       for f in range(n_features)])

    def grow(idx: np.ndarray, depth: int) -> TreeNode:
        yv = y[idx]
        pos = float(yv.sum())
        node = TreeNode(value=pos / idx.size)
        if pos == 0 or pos == idx.size or depth >= max_depth \
                or idx.size < 2 * min_leaf:
            return node
        grads, counts = [], []
        for f in range(n_features):
            b = binned[f][idx]
            nb = edges[f].size + 1
            grads.append(np.bincount(b, weights=yv, minlength=nb))
            counts.append(np.bincount(b, minlength=nb))
        best = _best_over_features(edges, grads, counts, "gini", min_leaf)
        if best is None:
            return node
        boundary = int(np.searchsorted(edges[best.feature], best.threshold,
                                       side="left"))
        mask = binned[best.feature][idx] <= boundary
        node.feature_index = best.feature
        node.threshold = best.threshold
        node.left = grow(idx[mask], depth + 1)
        node.right = grow(idx[~mask], depth + 1)
        return node

    return grow(np.arange(n), 0)


class _NodeBest(NamedTuple):
    feature: int
    threshold: float
    gain: float
    boundary: int


class _PreparedBins:
    """Dense scatter/padding maps for scanning all features at once.

    Per-feature histograms are laid out in one flat array (feature blocks
    of nb[f] bins); scatter_rows/cols lift that into a (n_features,
    max_nb) matrix whose rows can be cumsummed together.  boundary_ok
    masks the padded columns that are real split boundaries.
    """

    def __init__(self, edges: list[np.ndarray]):
        self.nb = np.array([e.size + 1 for e in edges], dtype=np.int64)
        self.offsets = np.concatenate(([0], np.cumsum(self.nb)[:-1]))
        self.total_bins = int(self.nb.sum())
        self.max_nb = int(self.nb.max()) if len(edges) else 1
        self.scatter_rows = np.repeat(np.arange(len(edges)), self.nb)
        self.scatter_cols = np.concatenate(
            [np.arange(n) for n in self.nb]) if len(edges) else \
            np.empty(0, dtype=np.int64)
        cols = np.arange(self.max_nb - 1)
        self.boundary_ok = cols[None, :] < (self.nb[:, None] - 1)
        self.padded_edges = np.zeros((len(edges), self.max_nb - 1))
        for f, e in enumerate(edges):
            self.padded_edges[f, :e.size] = e


@dataclass
class GrowthState:
    """Pre-binned training state threaded through one leaf-wise tree fit.

    grad/hess are per-sample numerator and denominator masses: residuals
    and p*(1-p) in boosting.  After growth, leaf_of maps each sample to
    its leaf id and leaf_values holds each leaf's raw (pre-shrinkage)
    output sum(grad)/(sum(hess)+EPS); gain_log records the applied splits'
    gains in pop order.
    """

    binned: np.ndarray          # (n_features, n) int32
    edges: list[np.ndarray]
    grad: np.ndarray
    hess: np.ndarray
    min_leaf: int = 1
    n_jobs: int = 1
    gain_log: list[float] = field(default_factory=list)
    leaf_of: np.ndarray | None = None
    leaf_values: dict[int, float] | None = None
    prep: _PreparedBins | None = field(default=None, repr=False)


def _node_best(state: GrowthState, idx: np.ndarray,
               pool: ThreadPoolExecutor | None) -> _NodeBest | None:
    if state.prep is None:
        state.prep = _PreparedBins(state.edges)
    prep = state.prep
    if prep.max_nb < 2:
        return None

    g = state.grad[idx]
    k = idx.size
    sub = state.binned[:, idx]
    off2d = sub + prep.offsets[:, None]
    gsum = np.empty(prep.total_bins)
    csum = np.empty(prep.total_bins)
    n_features = len(state.edges)

    def hist_range(f_lo: int, f_hi: int) -> None:
        if f_hi <= f_lo:
            return
        base = int(prep.offsets[f_lo])
        stop = int(prep.offsets[f_hi - 1] + prep.nb[f_hi - 1])
        width = stop - base
        seg = off2d[f_lo:f_hi].ravel() - base
        w = np.broadcast_to(g, (f_hi - f_lo, k)).ravel()
        gsum[base:stop] = np.bincount(seg, weights=w, minlength=width)
        csum[base:stop] = np.bincount(seg, minlength=width)

    if pool is None:
        hist_range(0, n_features)
    else:
        # Workers own disjoint feature ranges writing disjoint histogram
        # slices; per-bin accumulation order matches the serial pass, so
        # worker count cannot change the result.
        n_chunks = pool._max_workers
        bounds = np.linspace(0, n_features, n_chunks + 1).astype(int)
        futures = [pool.submit(hist_range, bounds[i], bounds[i + 1])
                   for i in range(n_chunks)]
        for fut in futures:
            fut.result()

    padded_g = np.zeros((n_features, prep.max_nb))
    padded_c = np.zeros((n_features, prep.max_nb))
    padded_g[prep.scatter_rows, prep.scatter_cols] = gsum
    padded_c[prep.scatter_rows, prep.scatter_cols] = csum
    cum_g = np.cumsum(padded_g, axis=1)
    cum_c = np.cumsum(padded_c, axis=1)
    sl, nl = cum_g[:, :-1], cum_c[:, :-1]
    sp = cum_g[:, -1:]
    sr = sp - sl
    nr = k - nl
    valid = prep.boundary_ok & (nl >= state.min_leaf) & (nr >= state.min_leaf)
    if not valid.any():
        return None
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = sl * sl / nl + sr * sr / nr - sp * sp / k
    masked = np.where(valid, raw, -np.inf)
    flat_idx = int(np.argmax(masked))
    f, b = divmod(flat_idx, prep.max_nb - 1)
    gain = float(masked.flat[flat_idx])
    if gain <= MIN_GAIN:
        return None
    return _NodeBest(int(f), float(state.edges[f][b]), gain, int(b))


@dataclass
class _Leaf:
    node: TreeNode
    idx: np.ndarray
    depth: int
    best: _NodeBest | None


def grow_leafwise(state: GrowthState, max_leaves: int = 31,
                  max_depth: int = 8) -> TreeNode:
    """Grow a regression tree by always splitting the highest-gain leaf.

    A priority queue orders candidate leaves by gain (ties to the earlier
    created leaf); growth stops at max_leaves, max_depth, or when no leaf
    has a positive-gain split.  Leaf values are sum(grad)/(sum(hess)+EPS).
    """
    if max_leaves < 2:
        raise InputDomainError(f"max_leaves must be >= 2, got {max_leaves}")
    if max_depth < 1:
        raise InputDomainError(f"max_depth must be >= 1, got {max_depth}")
    n = state.grad.size
    if n == 0:
        raise InputDomainError("cannot grow a tree on zero samples")
    pool = (ThreadPoolExecutor(max_workers=state.n_jobs)
            if state.n_jobs > 1 else None)
    try:
        root = TreeNode()
        entries: dict[int, _Leaf] = {}
        heap: list[tuple[float, int]] = []
        next_id = 0

        def new_leaf(node: TreeNode, idx: np.ndarray, depth: int) -> None:
            nonlocal next_id
            best = None
            if depth < max_depth and idx.size >= 2 * state.min_leaf:
                best = _node_best(state, idx, pool)
            entries[next_id] = _Leaf(node, idx, depth, best)
            if best is not None:
                heapq.heappush(heap, (-best.gain, next_id))
            next_id += 1

        new_leaf(root, np.arange(n), 0)
        n_leaves = 1
        while heap and n_leaves < max_leaves:
            _, lid = heapq.heappop(heap)
            leaf = entries.pop(lid)
            best = leaf.best
            mask = state.binned[best.feature][leaf.idx] <= best.boundary
            leaf.node.feature_index = best.feature
            leaf.node.threshold = best.threshold
            leaf.node.left = TreeNode()
            leaf.node.right = TreeNode()
            state.gain_log.append(best.gain)
            new_leaf(leaf.node.left, leaf.idx[mask], leaf.depth + 1)
            new_leaf(leaf.node.right, leaf.idx[~mask], leaf.depth + 1)
            n_leaves += 1

        state.leaf_of = np.empty(n, dtype=np.int64)
        state.leaf_values = {}
        for lid, leaf in entries.items():
            value = float(state.grad[leaf.idx].sum()
                          / (state.hess[leaf.idx].sum() + EPS))
            leaf.node.value = value
            state.leaf_of[leaf.idx] = lid
            state.leaf_values[lid] = value
        return root
    finally:
        if pool is not None:
            pool.shutdown()
