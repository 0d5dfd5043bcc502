import numpy as np
import pytest

from qmlgrid.baselines import (
    LogisticModel,
    fit_forest,
    fit_logistic,
    fit_tree,
    predict_forest,
    predict_logistic,
    predict_tree,
)
from qmlgrid.errors import TrainingDivergedError, UsageError
from qmlgrid.metrics import evaluate


def blobs(n=80, seed=3, gap=2.0):
    rng = np.random.default_rng(seed)
    half = n // 2
    X = np.vstack([
        rng.normal(-gap / 2, 1.0, (half, 2)),
        rng.normal(+gap / 2, 1.0, (n - half, 2)),
    ])
    y = np.concatenate([np.zeros(half, dtype=int), np.ones(n - half, dtype=int)])
    return X, y


class TestLogistic:
    def test_learns_separated_blobs(self):
        X, y = blobs(gap=4.0)
        model = fit_logistic(X, y)
        assert evaluate(y, predict_logistic(model, X)).f1 >= 0.95

    def test_loss_decreases(self):
        X, y = blobs()
        model = fit_logistic(X, y)
        assert model.losses[-1] < model.losses[0]

    def test_gradient_matches_finite_difference(self):
        # one hand-rolled GD step against numeric partials of the loss
        rng = np.random.default_rng(7)
        X = rng.normal(size=(12, 3))
        y = (rng.random(12) > 0.4).astype(int)
        cw = (0.4, 0.6)
        sw = np.asarray(cw)[y]

        def loss_at(w, b):
            z = X @ w + b
            p = np.clip(1 / (1 + np.exp(-z)), 1e-12, 1 - 1e-12)
            return np.mean(-sw * (y * np.log(p) + (1 - y) * np.log(1 - p)))

        w0 = rng.normal(size=3)
        b0 = 0.3
        p = 1 / (1 + np.exp(-(X @ w0 + b0)))
        residual = sw * (p - y)
        grad_w = X.T @ residual / len(y)
        grad_b = residual.sum() / len(y)
        eps = 1e-6
        for k in range(3):
            step = np.zeros(3)
            step[k] = eps
            num = (loss_at(w0 + step, b0) - loss_at(w0 - step, b0)) / (2 * eps)
            assert abs(num - grad_w[k]) < 1e-6
        num_b = (loss_at(w0, b0 + eps) - loss_at(w0, b0 - eps)) / (2 * eps)
        assert abs(num_b - grad_b) < 1e-6

    def test_zero_weight_class_ignored(self):
        # class 0 has weight 0, so a constant column aligned with class 1
        # dominates and everything lands in class 1
        X, y = blobs(gap=0.0, seed=11)
        model = fit_logistic(X, y, class_weights=(0.0, 1.0))
        assert np.all(predict_logistic(model, X) == 1)

    def test_divergence_aborts(self):
        # conflicting labels at one point, step size past the stable range:
        # iterates overshoot the minimum by a growing margin every step
        X = np.array([[10.0], [10.0]])
        y = np.array([0, 1])
        with pytest.raises(TrainingDivergedError):
            fit_logistic(X, y, class_weights=(1.0, 1.02), learning_rate=0.1)

    def test_rejects_bad_labels(self):
        X, _ = blobs(n=10)
        with pytest.raises(UsageError):
            fit_logistic(X, np.full(10, 2))

    def test_decision_boundary_at_half(self):
        model = LogisticModel(np.array([1.0]), 0.0, [])
        assert predict_logistic(model, [[0.0]])[0] == 1   # p = 0.5 exactly
        assert predict_logistic(model, [[-0.1]])[0] == 0


class TestTree:
    def test_solves_xor(self):
        X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
        y = np.array([0, 1, 1, 0])
        tree = fit_tree(X, y)
        assert list(predict_tree(tree, X)) == [0, 1, 1, 0]

    def test_pure_training_fit(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(60, 4))
        y = (rng.random(60) > 0.5).astype(int)
        tree = fit_tree(X, y)
        assert np.array_equal(predict_tree(tree, X), y)

    def test_threshold_is_midpoint(self):
        X = np.array([[1.0], [3.0], [5.0], [7.0]])
        y = np.array([0, 0, 1, 1])
        tree = fit_tree(X, y)
        assert tree.threshold == pytest.approx(4.0)

    def test_weighted_majority_leaf(self):
        # 3 zeros vs 1 one on identical rows: unweighted leaf says 0,
        # minority weighting flips it
        X = np.zeros((4, 1))
        y = np.array([0, 0, 0, 1])
        assert fit_tree(X, y).label == 0
        assert fit_tree(X, y, class_weights=(0.2, 0.8)).label == 1

    def test_min_leaf_limits_depth(self):
        X = np.arange(8, dtype=float).reshape(-1, 1)
        y = np.array([0, 0, 0, 0, 0, 0, 0, 1])
        tree = fit_tree(X, y, min_leaf=4)
        # the only split isolating the 1 would leave one row on the right
        assert tree.is_leaf() or min(
            tree.threshold - 0, 7 - tree.threshold) >= 3


class TestForest:
    def test_deterministic_given_seed(self):
        X, y = blobs(seed=9)
        a = fit_forest(X, y, n_trees=12, seed=4)
        b = fit_forest(X, y, n_trees=12, seed=4)
        probe = np.random.default_rng(1).normal(size=(30, 2))
        assert np.array_equal(predict_forest(a, probe), predict_forest(b, probe))

    def test_seed_changes_model(self):
        X, y = blobs(seed=9, gap=0.5)
        a = fit_forest(X, y, n_trees=12, seed=4)
        b = fit_forest(X, y, n_trees=12, seed=5)
        probe = np.random.default_rng(1).normal(size=(200, 2))
        assert not np.array_equal(predict_forest(a, probe),
                                  predict_forest(b, probe))

    def test_single_full_tree_matches_plain_tree(self):
        X, y = blobs(seed=2)
        forest = fit_forest(X, y, n_trees=1, bootstrap=False,
                            max_features=X.shape[1])
        tree = fit_tree(X, y)
        probe = np.random.default_rng(3).normal(size=(50, 2))
        assert np.array_equal(predict_forest(forest, probe),
                              predict_tree(tree, probe))

    def test_learns_blobs(self):
        X, y = blobs(gap=3.0)
        forest = fit_forest(X, y, n_trees=25, seed=0)
        Xt, yt = blobs(gap=3.0, seed=8)
        assert evaluate(yt, predict_forest(forest, Xt)).f1 >= 0.9

    def test_tie_votes_positive(self):
        X = np.array([[0.0], [1.0]])
        y = np.array([0, 1])
        forest = fit_forest(X, y, n_trees=2, seed=0)
        preds = predict_forest(forest, [[0.5]])
        votes = [predict_tree(t, [[0.5]])[0] for t in forest.trees]
        if votes[0] != votes[1]:
            assert preds[0] == 1
