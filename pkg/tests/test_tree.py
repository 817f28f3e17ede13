"""CART building blocks and the leaf-wise regression tree grower."""
import numpy as np
import pytest

from phytraffic.boosting import (EPS, FlatTree, GrowthState, TreeParams,
                                 best_split_exact, cart_train, grow_leafwise)
from phytraffic.boosting.splits import bin_index, capped_edges
from phytraffic.errors import InputDomainError


def _state(X, grad, hess=None, **kw):
    X = np.asarray(X, dtype=float)
    edges = [capped_edges(X[:, f], 255) for f in range(X.shape[1])]
    binned = np.stack([bin_index(X[:, f], edges[f])
                       for f in range(X.shape[1])])
    if hess is None:
        hess = np.ones(X.shape[0])
    return GrowthState(binned=binned, edges=edges,
                       grad=np.asarray(grad, dtype=float),
                       hess=np.asarray(hess, dtype=float), **kw)


class TestCart:
    def test_memorizes_separable_data(self):
        rng = np.random.Generator(np.random.PCG64(1))
        X = rng.normal(0, 1, size=(60, 3))
        y = (X[:, 1] > 0.2).astype(int)
        tree = cart_train(X, y)
        assert [tree.predict_one(x) for x in X] == y.tolist()
        leaf_values = {n.value for n in tree.walk() if n.is_leaf}
        assert leaf_values <= {0.0, 1.0}

    def test_unsplittable_leaf_holds_positive_share(self):
        X = np.full((3, 2), 1.0)
        tree = cart_train(X, np.array([0, 1, 1]))
        assert tree.is_leaf
        assert tree.value == pytest.approx(2 / 3)

    def test_depth_cap(self):
        rng = np.random.Generator(np.random.PCG64(2))
        X = rng.normal(0, 1, size=(200, 4))
        y = rng.integers(0, 2, 200)
        tree = cart_train(X, y, max_depth=2)
        assert tree.depth() <= 2

    def test_parity_resolves_through_zero_gain_split(self):
        X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        y = np.array([0, 1, 1, 0])
        tree = cart_train(X, y, max_depth=2)
        assert [tree.predict_one(x) for x in X] == y.tolist()
        assert tree.n_leaves() == 4

    def test_min_leaf_blocks_splits(self):
        X = np.arange(6.0).reshape(6, 1)
        y = np.array([0, 0, 0, 0, 0, 1])
        tree = cart_train(X, y, min_leaf=3)
        assert tree.depth() <= 1
        for node in tree.walk():
            if not node.is_leaf:
                assert node.threshold == 2.5

    @pytest.mark.parametrize("kw", [{"max_depth": 0}, {"min_leaf": 0}])
    def test_bad_arguments(self, kw):
        X = np.zeros((4, 1))
        y = np.array([0, 1, 0, 1])
        with pytest.raises(InputDomainError):
            cart_train(X, y, **kw)

    def test_bad_labels(self):
        with pytest.raises(InputDomainError):
            cart_train(np.zeros((3, 1)), np.array([0, 1, 2]))
        with pytest.raises(InputDomainError):
            cart_train(np.zeros((0, 1)), np.empty(0))


class TestFlatTree:
    def test_apply_matches_pointer_walk(self):
        rng = np.random.Generator(np.random.PCG64(3))
        X = rng.normal(0, 1, size=(120, 5))
        y = rng.integers(0, 2, 120)
        tree = cart_train(X, y, max_depth=4)
        flat = FlatTree(tree)
        probe = rng.normal(0, 1, size=(300, 5))
        batch = flat.apply(probe)
        assert batch.tolist() == [tree.predict_one(x) for x in probe]

    def test_to_lists_mirrors_arrays(self):
        tree = cart_train(np.arange(4.0).reshape(4, 1), np.array([0, 0, 1, 1]))
        flat = FlatTree(tree)
        feat, thr, left, right, val = flat.to_lists()
        assert feat == flat.feature.tolist()
        assert len(feat) == len(thr) == len(left) == len(right) == len(val)
        assert sum(1 for f in feat if f < 0) == tree.n_leaves()


class TestLeafwiseGrowth:
    def test_caps_and_bookkeeping(self):
        rng = np.random.Generator(np.random.PCG64(4))
        X = rng.integers(0, 10, size=(80, 3)).astype(float)
        grad = rng.normal(0, 1, 80)
        state = _state(X, grad)
        tree = grow_leafwise(state, max_leaves=5, max_depth=3)
        assert 2 <= tree.n_leaves() <= 5
        assert tree.depth() <= 3
        assert tree.n_leaves() == 1 + len(state.gain_log)
        assert state.leaf_of.shape == (80,)
        assert set(state.leaf_values) == set(state.leaf_of.tolist())

    def test_leaf_values_are_grad_over_hess(self):
        rng = np.random.Generator(np.random.PCG64(5))
        X = rng.integers(0, 8, size=(60, 2)).astype(float)
        grad = rng.normal(0, 1, 60)
        hess = rng.random(60) + 0.1
        state = _state(X, grad, hess)
        grow_leafwise(state, max_leaves=6, max_depth=4)
        for lid, value in state.leaf_values.items():
            members = state.leaf_of == lid
            want = grad[members].sum() / (hess[members].sum() + EPS)
            assert value == pytest.approx(want, abs=1e-12)

    def test_root_split_agrees_with_exact_search(self):
        rng = np.random.Generator(np.random.PCG64(6))
        X = rng.integers(0, 12, size=(100, 4)).astype(float)
        grad = X[:, 2] * 0.5 + rng.normal(0, 0.1, 100)
        state = _state(X, grad)
        tree = grow_leafwise(state, max_leaves=2, max_depth=1)
        want = best_split_exact(X, grad, "variance")
        assert tree.feature_index == want.feature
        assert tree.threshold == want.threshold
        assert state.gain_log[0] == pytest.approx(want.gain, abs=1e-9)

    def test_worker_count_cannot_change_the_tree(self):
        rng = np.random.Generator(np.random.PCG64(7))
        X = rng.integers(0, 30, size=(300, 6)).astype(float)
        grad = rng.normal(0, 1, 300)
        hess = rng.random(300) + 0.2
        grown = []
        for n_jobs in (1, 2, 3):
            state = _state(X, grad, hess, n_jobs=n_jobs)
            grown.append(FlatTree(grow_leafwise(state, 8, 4)).to_lists())
        assert grown[0] == grown[1] == grown[2]

    def test_min_leaf_floor(self):
        rng = np.random.Generator(np.random.PCG64(8))
        X = rng.integers(0, 9, size=(90, 2)).astype(float)
        state = _state(X, rng.normal(0, 1, 90), min_leaf=7)
        grow_leafwise(state, max_leaves=8, max_depth=5)
        counts = np.bincount(state.leaf_of)
        assert counts[counts > 0].min() >= 7

    def test_degenerate_arguments(self):
        state = _state(np.arange(4.0).reshape(4, 1), np.ones(4))
        with pytest.raises(InputDomainError):
            grow_leafwise(state, max_leaves=1)
        with pytest.raises(InputDomainError):
            grow_leafwise(state, max_depth=0)
        empty = _state(np.empty((0, 1)), np.empty(0))
        with pytest.raises(InputDomainError):
            grow_leafwise(empty)

    def test_params_defaults(self):
        p = TreeParams()
        assert (p.max_leaves, p.max_depth, p.max_bins, p.min_leaf,
                p.n_jobs) == (31, 8, 255, 20, 1)
