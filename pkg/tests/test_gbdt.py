"""Boosting, forest, and logistic learners against hand-computed references."""
import math

import numpy as np
import pytest

import oracles
from phytraffic.boosting import (BoostedModel, TreeParams, feature_importance,
                                 gbdt_margin, gbdt_predict,
                                 gbdt_predict_proba, gbdt_round,
                                 gbdt_score_one, gbdt_train, init_log_odds,
                                 logistic_baseline_train, logistic_predict,
                                 logistic_predict_proba, predict_batch,
                                 predict_one, predict_proba_batch, rf_predict,
                                 rf_predict_proba, rf_train, sigmoid)
from phytraffic.errors import DegenerateDataError, InputDomainError
from phytraffic.pipeline import extract, samples_to_arrays
from phytraffic.tracegen import default_profiles, generate_trace


def _random_dataset(rng):
    n = int(rng.integers(6, 33))
    f = int(rng.integers(1, 5))
    X = rng.integers(0, 7, size=(n, f)).astype(float)
    y = rng.integers(0, 2, n)
    if y.min() == y.max():
        y[0] = 1 - y[0]
    return X, y


class TestInitLogOdds:
    def test_matches_count_ratio(self):
        assert init_log_odds(np.array([1, 1, 1, 0])) == math.log(3)
        assert init_log_odds(np.array([0, 1])) == 0.0
        assert init_log_odds(np.array([0, 0, 0, 1])) == math.log(1 / 3)

    def test_rejects_non_binary_and_single_class(self):
        with pytest.raises(InputDomainError):
            init_log_odds(np.array([0, 2]))
        with pytest.raises(InputDomainError):
            init_log_odds(np.array([], dtype=int))
        with pytest.raises(DegenerateDataError):
            init_log_odds(np.array([1, 1, 1]))


class TestRoundRecurrence:
    def test_separable_set_reaches_perfect_accuracy(self):
        X = np.array([[0.0], [1.0], [2.0], [3.0]])
        y = np.array([0, 0, 1, 1])
        trace = []
        params = TreeParams(max_leaves=2, max_depth=1, min_leaf=1)
        model = gbdt_train(X, y, n_trees=3, learning_rate=0.5,
                           tree_params=params, round_trace=trace)
        assert gbdt_predict(model, X).tolist() == y.tolist()
        replayed = oracles.replay_rounds(y.tolist(), model.init_log_odds,
                                         0.5, trace)
        assert oracles.max_round_deviation(trace, replayed) <= 1e-9

    def test_singleton_leaf_value(self):
        # One sample with r = 0.5 at p = 0.5 must produce output 2.0.
        X = np.array([[0.0], [1.0]])
        y = np.array([1, 0])
        trace = []
        gbdt_train(X, y, n_trees=1, learning_rate=0.1,
                   tree_params=TreeParams(max_leaves=2, max_depth=1,
                                          min_leaf=1),
                   round_trace=trace)
        values = sorted(trace[0]["leaf_values"].values())
        assert values == pytest.approx([-2.0, 2.0], abs=1e-9)

    def test_shared_leaf_value(self):
        # r = (0.25, -0.75) at p = 0.75 averages to -0.5 / 0.375.
        p = np.array([0.75, 0.75])
        r = np.array([0.25, -0.75])
        value = r.sum() / ((p * (1 - p)).sum() + 1e-12)
        assert value == pytest.approx(-4 / 3, abs=1e-9)

    def test_randomized_recurrence(self):
        rng = np.random.Generator(np.random.PCG64(99))
        for _ in range(12):
            X, y = _random_dataset(rng)
            lr = float(rng.choice([0.1, 0.3, 0.5]))
            params = TreeParams(max_leaves=4, max_depth=3, min_leaf=1)
            trace = []
            model = gbdt_train(X, y, n_trees=5, learning_rate=lr,
                               tree_params=params, round_trace=trace)
            replayed = oracles.replay_rounds(y.tolist(), model.init_log_odds,
                                             lr, trace)
            assert oracles.max_round_deviation(trace, replayed) <= 1e-9
            assert gbdt_predict(model, X).tolist() == \
                oracles.final_labels(replayed)

    def test_partition_agrees_with_tree_routing(self):
        rng = np.random.Generator(np.random.PCG64(7))
        X, y = _random_dataset(rng)
        trace = []
        model = gbdt_train(X, y, n_trees=3,
                           tree_params=TreeParams(max_leaves=4, max_depth=3,
                                                  min_leaf=1),
                           round_trace=trace)
        for tree, tr in zip(model.trees, trace):
            routed = [tree.predict_one(x) for x in X]
            assigned = [tr["leaf_values"][lid] for lid in tr["leaf_of"]]
            assert routed == assigned

    def test_single_round_helper_matches_train(self):
        X = np.array([[0.0], [1.0], [2.0], [3.0]])
        y = np.array([0, 1, 0, 1])
        base = init_log_odds(y)
        params = TreeParams(max_leaves=2, max_depth=1, min_leaf=1)
        _, updated = gbdt_round(np.full(4, base), y, X, params,
                                learning_rate=0.2)
        trace = []
        gbdt_train(X, y, n_trees=1, learning_rate=0.2, tree_params=params,
                   round_trace=trace)
        assert updated.tolist() == trace[0]["log_odds"].tolist()


class TestTrainingLoss:
    def test_nll_non_increasing_for_small_learning_rates(self):
        rng = np.random.Generator(np.random.PCG64(13))
        params = TreeParams(max_leaves=4, max_depth=3, min_leaf=1)
        for lr in (0.1, 0.3):
            for _ in range(6):
                X, y = _random_dataset(rng)
                model = gbdt_train(X, y, n_trees=12, learning_rate=lr,
                                   tree_params=params)
                diffs = np.diff(model.train_nll)
                assert diffs.max() <= 1e-9

    def test_recorded_nll_matches_direct_evaluation(self):
        X = np.array([[0.0], [1.0], [2.0], [3.0]])
        y = np.array([0, 1, 1, 1])
        model = gbdt_train(X, y, n_trees=2,
                           tree_params=TreeParams(max_leaves=2, max_depth=1,
                                                  min_leaf=1))
        z0 = model.init_log_odds
        want = math.fsum(math.log1p(math.exp(-abs(z0)))
                         + max(z0, 0) - yi * z0 for yi in y)
        assert model.train_nll[0] == pytest.approx(want, abs=1e-9)
        assert len(model.train_nll) == 3


class TestPrediction:
    def test_probability_exactly_half_is_class_zero(self):
        model = BoostedModel(init_log_odds=0.0, learning_rate=0.5, trees=[],
                             n_features=2)
        assert gbdt_predict_proba(model, np.zeros(2)) == 0.5
        assert gbdt_predict(model, np.zeros(2)) == 0
        assert gbdt_predict(model, np.zeros((3, 2))).tolist() == [0, 0, 0]

    def test_score_one_equals_batch_margin(self):
        rng = np.random.Generator(np.random.PCG64(21))
        X, y = _random_dataset(rng)
        model = gbdt_train(X, y, n_trees=4,
                           tree_params=TreeParams(max_leaves=4, max_depth=3,
                                                  min_leaf=1))
        margins = gbdt_margin(model, X)
        for i, row in enumerate(X):
            assert gbdt_score_one(model, row.tolist()) == \
                pytest.approx(margins[i], abs=1e-12)

    def test_learning_rate_domain(self):
        with pytest.raises(InputDomainError):
            BoostedModel(init_log_odds=0.0, learning_rate=0.0, trees=[],
                         n_features=1)
        with pytest.raises(InputDomainError):
            BoostedModel(init_log_odds=0.0, learning_rate=1.5, trees=[],
                         n_features=1)

    def test_train_input_validation(self):
        with pytest.raises(InputDomainError):
            gbdt_train(np.zeros((4, 2)), np.array([0, 1, 0, 1]), n_trees=0)
        with pytest.raises(InputDomainError):
            gbdt_train(np.zeros((4, 2)), np.array([0, 1]))
        with pytest.raises(DegenerateDataError):
            gbdt_train(np.zeros((4, 2)), np.array([1, 1, 1, 1]))

    def test_sigmoid_is_stable_at_extremes(self):
        z = np.array([-800.0, 0.0, 800.0])
        p = sigmoid(z)
        assert p[0] == 0.0
        assert p[1] == 0.5
        assert p[2] == 1.0


class TestForest:
    def test_probability_is_exact_mean_of_members(self):
        rng = np.random.Generator(np.random.PCG64(31))
        X, y = _random_dataset(rng)
        model = rf_train(X, y, n_trees=9, seed=5, max_depth=3)
        probe = rng.normal(0, 3, size=(40, X.shape[1]))
        total = np.zeros(40)
        for flat in model.flat_trees():
            total += flat.apply(probe)
        assert np.array_equal(rf_predict_proba(model, probe), total / 9)
        one = probe[0]
        want = sum(t.predict_one(one) for t in model.trees) / 9
        assert rf_predict_proba(model, one) == want

    def test_half_probability_votes_class_zero(self):
        from phytraffic.boosting import ForestModel, TreeNode
        split = ForestModel(trees=[TreeNode(value=1.0), TreeNode(value=0.0)],
                            bootstrap_seed=0, feature_subsample=1.0,
                            n_features=1)
        x = np.array([0.0])
        assert rf_predict_proba(split, x) == 0.5
        assert rf_predict(split, x) == 0
        assert rf_predict(split, x[None, :]).tolist() == [0]

    def test_deterministic_per_seed(self):
        rng = np.random.Generator(np.random.PCG64(41))
        X, y = _random_dataset(rng)
        a = rf_train(X, y, n_trees=5, seed=3)
        b = rf_train(X, y, n_trees=5, seed=3)
        c = rf_train(X, y, n_trees=5, seed=4)
        probe = rng.normal(0, 2, size=(25, X.shape[1]))
        assert np.array_equal(rf_predict_proba(a, probe),
                              rf_predict_proba(b, probe))
        assert not np.array_equal(rf_predict_proba(a, probe),
                                  rf_predict_proba(c, probe))

    def test_feature_subsample_remaps_indices(self):
        rng = np.random.Generator(np.random.PCG64(51))
        X = rng.normal(0, 1, size=(60, 6))
        y = (X[:, 0] + X[:, 5] > 0).astype(int)
        model = rf_train(X, y, n_trees=8, seed=1, feature_subsample=0.5)
        for tree in model.trees:
            for node in tree.walk():
                if not node.is_leaf:
                    assert 0 <= node.feature_index < 6
        with pytest.raises(InputDomainError):
            rf_train(X, y, feature_subsample=0.0)


class TestLogisticBaseline:
    def test_learns_a_separable_direction(self):
        rng = np.random.Generator(np.random.PCG64(61))
        X = rng.normal(0, 1, size=(200, 4))
        y = (X @ np.array([1.0, -2.0, 0.5, 0.0]) > 0).astype(int)
        model = logistic_baseline_train(X, y)
        acc = (logistic_predict(model, X) == y).mean()
        assert acc > 0.97

    def test_zero_epochs_predicts_class_zero_everywhere(self):
        X = np.array([[0.0, 3.0], [1.0, -2.0]])
        y = np.array([0, 1])
        model = logistic_baseline_train(X, y, epochs=0)
        assert logistic_predict_proba(model, X).tolist() == [0.5, 0.5]
        assert logistic_predict(model, X).tolist() == [0, 0]

    def test_constant_columns_survive_standardization(self):
        X = np.column_stack([np.arange(10.0), np.full(10, 4.0)])
        y = (np.arange(10) >= 5).astype(int)
        model = logistic_baseline_train(X, y, epochs=50)
        p = logistic_predict_proba(model, X)
        assert np.isfinite(p).all()
        assert model.scale[1] == 1.0


class TestModelHelpers:
    def test_importance_counts_internal_nodes(self):
        rng = np.random.Generator(np.random.PCG64(71))
        X, y = _random_dataset(rng)
        model = gbdt_train(X, y, n_trees=4,
                           tree_params=TreeParams(max_leaves=4, max_depth=3,
                                                  min_leaf=1))
        counts = feature_importance(model)
        internal = sum(1 for t in model.trees for n in t.walk()
                       if not n.is_leaf)
        assert counts.sum() == internal
        assert counts.shape == (X.shape[1],)

    def test_importance_rejects_linear_models(self):
        model = logistic_baseline_train(np.array([[0.0], [1.0]]),
                                        np.array([0, 1]), epochs=1)
        with pytest.raises(InputDomainError):
            feature_importance(model)

    def test_batch_helpers_cover_every_model_kind(self):
        rng = np.random.Generator(np.random.PCG64(81))
        X, y = _random_dataset(rng)
        kinds = [
            gbdt_train(X, y, n_trees=3,
                       tree_params=TreeParams(max_leaves=4, max_depth=3,
                                              min_leaf=1)),
            rf_train(X, y, n_trees=3, seed=2),
            logistic_baseline_train(X, y, epochs=20),
        ]
        for model in kinds:
            proba = predict_proba_batch(model, X)
            labels = predict_batch(model, X)
            assert labels.tolist() == (proba > 0.5).astype(int).tolist()
            lab, p = predict_one(model, X[0])
            assert p == pytest.approx(proba[0], abs=1e-12)
            assert lab == labels[0]
        with pytest.raises(InputDomainError):
            predict_proba_batch(object(), X)


class TestOnRealWindows:
    def test_loss_decreases_on_extracted_samples(self):
        web, video = default_profiles()
        samples = []
        for profile in (web, video):
            trace = generate_trace(profile, 2000, seed=19)
            kept, _ = extract(trace, 1, th=100.0)
            samples.extend(kept)
        X, y = samples_to_arrays(samples)
        model = gbdt_train(X, y, n_trees=15, learning_rate=0.3)
        assert np.diff(model.train_nll).max() <= 1e-9
        acc = (gbdt_predict(model, X) == y).mean()
        assert acc > 0.8
