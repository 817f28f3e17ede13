"""Split search over exact value midpoints and capped-bin histograms.

Both searches share one scan: candidate thresholds are bin edges, bins are
right-closed (a sample routes left iff value <= threshold), and gains are
computed from per-bin prefix sums.  The exact search places one edge at
every midpoint between consecutive distinct values, so whenever the bin
budget covers all distinct values the histogram search degenerates to the
exact search and returns the identical (feature, threshold, gain).

Gain conventions (count-weighted, so gains are comparable across leaves):

* variance: reduction in the residual sum of squares,
  sum_l^2/n_l + sum_r^2/n_r - sum_p^2/n_p.
* gini: total impurity decrease n_p*G(p) - n_l*G(l) - n_r*G(r), which
  reduces to the same sum-of-squares form over per-class counts.

Ties break toward the lowest feature index, then the lowest threshold.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..errors import InputDomainError

# Gains at or below this are treated as "no improvement".
MIN_GAIN = 1e-12


class Split(NamedTuple):
    feature: int
    threshold: float
    gain: float


def gini(class_counts) -> float:
    """Binary Gini impurity 1 - p0^2 - p1^2 from a (count0, count1) pair."""
    c0, c1 = class_counts
    if c0 < 0 or c1 < 0:
        raise InputDomainError("class counts must be non-negative")
    n = c0 + c1
    if n == 0:
        raise InputDomainError("class counts must not both be zero")
    p0 = c0 / n
    p1 = c1 / n
    return 1.0 - (p0 * p0 + p1 * p1)


def midpoint_edges(values: np.ndarray) -> np.ndarray:
    """Edges between consecutive distinct values; one bin per distinct value.

    Midpoints that round up to the larger neighbour are dropped so that no
    threshold ever routes its upper value left.
    """
    v = np.unique(values)
    if v.size < 2:
        return np.empty(0)
    e = (v[:-1] + v[1:]) / 2.0
    return e[e < v[1:]]


def capped_edges(values: np.ndarray, max_bins: int) -> np.ndarray:
    """Midpoint edges when the budget allows, quantile edges otherwise."""
    if max_bins < 2:
        raise InputDomainError(f"max_bins must be >= 2, got {max_bins}")
    v = np.unique(values)
    if v.size <= max_bins:
        if v.size < 2:
            return np.empty(0)
        e = (v[:-1] + v[1:]) / 2.0
        return e[e < v[1:]]
    return np.unique(np.quantile(values, np.arange(1, max_bins) / max_bins))


def bin_index(values: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Right-closed binning: bin b covers (edges[b-1], edges[b]]."""
    return np.searchsorted(edges, values, side="left").astype(np.int32)


@dataclass
class Histogram:
    """Per-feature bin edges plus per-bin (gradient, hessian, count) sums."""

    edges: list[np.ndarray]
    grad: list[np.ndarray]
    hess: list[np.ndarray]
    count: list[np.ndarray]
    n_samples: int

    @property
    def n_features(self) -> int:
        return len(self.edges)


def build_histogram(X: np.ndarray, grad: np.ndarray,
                    hess: np.ndarray | None = None,
                    max_bins: int = 255) -> Histogram:
    X = np.asarray(X, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if X.ndim != 2:
        raise InputDomainError("X must be 2-dimensional")
    n, n_features = X.shape
    if grad.shape != (n,):
        raise InputDomainError("grad length must match sample count")
    if hess is None:
        hess = np.ones(n)
    edges, gsums, hsums, counts = [], [], [], []
    for f in range(n_features):
        e = capped_edges(X[:, f], max_bins)
        idx = bin_index(X[:, f], e)
        nb = e.size + 1
        edges.append(e)
        gsums.append(np.bincount(idx, weights=grad, minlength=nb))
        hsums.append(np.bincount(idx, weights=hess, minlength=nb))
        counts.append(np.bincount(idx, minlength=nb).astype(np.int64))
    return Histogram(edges, gsums, hsums, counts, n)


def _scan_edges(edges: np.ndarray, grad_bins: np.ndarray,
                cnt_bins: np.ndarray, criterion: str,
                min_leaf: int) -> tuple[float, int] | None:
    """Best (gain, edge index) over one feature's bin boundaries.

    For 'variance', grad_bins holds per-bin target sums; for 'gini' it
    holds per-bin positive-class counts.  Scanning ascends thresholds, and
    argmax takes the first maximum, so ties fall to the lowest threshold.
    """
    if edges.size == 0:
        return None
    cum_c = np.cumsum(cnt_bins).astype(float)
    cum_g = np.cumsum(grad_bins)
    n = int(cum_c[-1])
    nl = cum_c[:-1]
    nr = n - nl
    sl = cum_g[:-1]
    sp = cum_g[-1]
    sr = sp - sl
    valid = (nl >= min_leaf) & (nr >= min_leaf)
    if not valid.any():
        return None
    with np.errstate(divide="ignore", invalid="ignore"):
        if criterion == "variance":
            gain = sl * sl / nl + sr * sr / nr - sp * sp / n
        elif criterion == "gini":
            # Positive-class counts c1 plus complements c0 = n - c1.
            c0l = nl - sl
            c0r = nr - sr
            c0p = n - sp
            gain = ((sl * sl + c0l * c0l) / nl + (sr * sr + c0r * c0r) / nr
                    - (sp * sp + c0p * c0p) / n)
        else:
            raise InputDomainError(f"unknown criterion {criterion!r}")
    gain = np.where(valid, gain, -np.inf)
    b = int(np.argmax(gain))
    if not np.isfinite(gain[b]):
        return None
    return float(gain[b]), b


def _best_over_features(edges_list, grad_list, cnt_list, criterion,
                        min_leaf) -> Split | None:
    best: Split | None = None
    for f in range(len(edges_list)):
        found = _scan_edges(edges_list[f], grad_list[f], cnt_list[f],
                            criterion, min_leaf)
        if found is None:
            continue
        gain, b = found
        if best is None or gain > best.gain:
            best = Split(f, float(edges_list[f][b]), gain)
    return best


def best_split_candidate(X: np.ndarray, targets: np.ndarray, criterion: str,
                         min_leaf: int = 1) -> Split | None:
    """Exact-search candidate including zero-gain splits (see cart_train)."""
    X = np.asarray(X, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if X.ndim != 2 or X.shape[0] != targets.shape[0]:
        raise InputDomainError("X and targets must align on samples")
    if X.shape[0] < 2:
        return None
    edges_list, grad_list, cnt_list = [], [], []
    for f in range(X.shape[1]):
        e = midpoint_edges(X[:, f])
        idx = bin_index(X[:, f], e)
        nb = e.size + 1
        edges_list.append(e)
        grad_list.append(np.bincount(idx, weights=targets, minlength=nb))
        cnt_list.append(np.bincount(idx, minlength=nb).astype(np.int64))
    return _best_over_features(edges_list, grad_list, cnt_list, criterion,
                               min_leaf)


def best_split_exact(X: np.ndarray, targets: np.ndarray,
                     criterion: str = "gini",
                     min_leaf: int = 1) -> Split | None:
    """Enumerate every midpoint between consecutive distinct values.

    Returns None when fewer than two samples are given or when no split
    yields a positive gain.
    """
    best = best_split_candidate(X, targets, criterion, min_leaf)
    if best is None or best.gain <= MIN_GAIN:
        return None
    return best


def best_split_hist(hist: Histogram, criterion: str = "variance",
                    min_leaf: int = 1) -> Split | None:
    """Scan bin boundaries only; equals the exact search when every
    feature's bin count covers its distinct values."""
    if hist.n_samples < 2:
        return None
    best = _best_over_features(hist.edges, hist.grad, hist.count, criterion,
                               min_leaf)
    if best is None or best.gain <= MIN_GAIN:
        return None
    return best
