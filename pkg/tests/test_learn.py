import json
from itertools import product

import numpy as np
import pytest

from compnet.labels import ClassLabel
from compnet.learn import (Dataset, DecisionTree, RandomForest, TreeNode, classification_metrics,
                           gini, load_model, majority_baseline, majority_vote, make_dataset,
                           mdi_importance, save_model, temporal_split, train_decision_tree,
                           train_random_forest)

T, M, B = ClassLabel.TOP, ClassLabel.MIDDLE, ClassLabel.BOTTOM


def ds(X, y, rounds=None):
    X = np.asarray(X, dtype=float)
    if rounds is None:
        rounds = np.ones(len(y), dtype=int)
    names = tuple(f"f{i}" for i in range(X.shape[1]))
    return Dataset(X, y, rounds, np.array([f"a{i}" for i in range(len(y))], dtype=object), names)


def test_gini_examples():
    assert gini([5, 5]) == 0.5
    assert gini([10, 0, 0]) == 0
    assert gini([1, 2, 3]) == pytest.approx(11 / 18)


def test_temporal_split_k10_and_k12():
    for k, last_train in ((10, 8), (12, 10)):
        rounds = np.repeat(np.arange(1, k + 1), 3)
        data = ds(np.zeros((rounds.size, 1)), np.zeros(rounds.size, dtype=int), rounds)
        train, test = temporal_split(data)
        assert train.rounds.max() == last_train and test.rounds.min() == last_train + 1
        assert set(test.rounds) == set(range(last_train + 1, k + 1))


def test_temporal_split_order_independent():
    rng = np.random.default_rng(0)
    rounds = np.repeat(np.arange(1, 11), 4)
    X = rng.random((rounds.size, 2))
    data = ds(X, np.zeros(rounds.size, dtype=int), rounds)
    perm = rng.permutation(rounds.size)
    a, _ = temporal_split(data)
    b, _ = temporal_split(data.subset(perm))
    assert sorted(map(tuple, a.X)) == sorted(map(tuple, b.X))


def test_temporal_split_keeps_a_test_round():
    rounds = np.array([1, 1, 2, 2])
    train, test = temporal_split(ds(np.zeros((4, 1)), np.zeros(4, dtype=int), rounds))
    assert set(train.rounds) == {1} and set(test.rounds) == {2}
    with pytest.raises(ValueError):
        temporal_split(ds(np.zeros((2, 1)), np.zeros(2, dtype=int)))


def test_separable_single_feature():
    data = ds([[0], [1], [2], [3]], [T, T, B, B])
    tree = train_decision_tree(data)
    assert tree.depth() == 1
    assert (tree.predict(data.X) == data.y).all()
    assert tree.root.threshold == 1.5


def test_identical_rows_single_leaf():
    tree = train_decision_tree(ds([[1, 1]] * 5, [M, M, M, T, B]))
    assert tree.root.is_leaf and tree.predict([[1, 1]]).tolist() == [M]


def _best_stump_accuracy(X, y):
    # exhaustive oracle: every feature, every midpoint, every labelling of the two sides
    best = 0.0
    for f in range(X.shape[1]):
        vals = np.unique(X[:, f])
        for lo, hi in zip(vals[:-1], vals[1:]):
            left = X[:, f] <= (lo + hi) / 2
            for a, b in product(range(3), repeat=2):
                best = max(best, float(np.mean(np.where(left, a, b) == y)))
    return best


def test_xor_needs_depth_two():
    X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]] * 3, dtype=float)
    y = np.array([T, B, B, T] * 3)
    assert _best_stump_accuracy(X, y) <= 0.75
    stump = DecisionTree(max_depth=1).fit(X, y)
    assert np.mean(stump.predict(X) == y) <= 0.75
    tree = DecisionTree(max_depth=2).fit(X, y)
    assert np.mean(tree.predict(X) == y) == 1.0


def test_pure_leaves_reproduce_training_labels():
    rng = np.random.default_rng(4)
    X = rng.random((40, 3))
    y = rng.integers(0, 3, 40)
    tree = DecisionTree(max_depth=None).fit(X, y)
    assert (tree.predict(X) == y).all()
    assert tree.predict(np.zeros((0, 3))).shape == (0,)


def test_forest_of_one_equals_tree():
    rng = np.random.default_rng(9)
    X = rng.random((60, 4))
    y = rng.integers(0, 3, 60)
    forest = RandomForest(n_trees=1, max_features=None, bootstrap=False, seed=3).fit(X, y)
    tree = DecisionTree().fit(X, y)
    assert forest.trees[0].root.to_dict() == tree.root.to_dict()
    assert (forest.predict(X) == tree.predict(X)).all()


def test_forest_deterministic_and_parallel_equal():
    rng = np.random.default_rng(2)
    data = ds(rng.random((80, 5)), rng.integers(0, 3, 80))
    a = train_random_forest(data, n_trees=15, seed=42)
    b = train_random_forest(data, n_trees=15, seed=42)
    c = train_random_forest(data, n_trees=15, seed=42, n_jobs=2)
    assert save_model(a) == save_model(b) == save_model(c)
    assert save_model(a) != save_model(train_random_forest(data, n_trees=15, seed=43))


def test_vote_tie_goes_to_lower_class():
    votes = np.array([[40, 40, 20], [10, 45, 45], [0, 1, 0]])
    assert majority_vote(votes).tolist() == [T, M, M]


def test_forest_beats_single_tree_on_noisy_benchmark():
    tree_acc, forest_acc = [], []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        X = rng.random((300, 5))
        y = np.where(X[:, 0] + 0.5 * X[:, 1] > 1.0, T, np.where(X[:, 0] < 0.3, B, M))
        flip = rng.random(300) < 0.10
        y[flip] = (y[flip] + rng.integers(1, 3, flip.sum())) % 3
        tr, te = slice(0, 200), slice(200, 300)
        tree = DecisionTree(max_depth=10).fit(X[tr], y[tr])
        forest = RandomForest(n_trees=30, seed=seed).fit(X[tr], y[tr])
        tree_acc.append(np.mean(tree.predict(X[te]) == y[te]))
        forest_acc.append(np.mean(forest.predict(X[te]) == y[te]))
    assert np.mean(forest_acc) >= np.mean(tree_acc)


def test_mdi_single_split_and_unused_feature():
    data = ds([[0, 5, 1], [1, 5, 2], [2, 5, 1], [3, 5, 2]], [T, T, B, B])
    imp = mdi_importance(train_decision_tree(data))
    assert imp.tolist() == [1.0, 0.0, 0.0]


def test_mdi_hand_built_tree():
    # root (p=1, dI=0.3) on f0; its left child (p=0.4, dI=0.2) on f1
    leaf = lambda w: TreeNode(np.array([1.0, 0, 0]), 1, 0.0, w)
    left = TreeNode(np.array([.5, .5, 0]), 4, 0.5, 0.4, feature=1, threshold=0.0,
                    impurity_decrease=0.2, left=leaf(0.2), right=leaf(0.2))
    root = TreeNode(np.array([.4, .3, .3]), 10, 0.66, 1.0, feature=0, threshold=0.0,
                    impurity_decrease=0.3, left=left, right=leaf(0.6))
    tree = DecisionTree()
    tree.root, tree.n_features = root, 3
    raw = [0.3, 0.4 * 0.2, 0.0]
    assert np.allclose(tree.raw_importance(), raw)
    assert np.allclose(mdi_importance(tree), np.array(raw) / sum(raw))


def test_mdi_matches_hand_arithmetic_on_fitted_tree():
    # y = [T,T,M,B]: the root separates {T,T} from {M,B}, then {M,B} splits once more
    X = np.array([[0, 0], [1, 0], [2, 0], [3, 1]], dtype=float)
    y = np.array([T, T, M, B])
    tree = DecisionTree().fit(X, y)
    g_root = gini([2, 1, 1])
    # best root split separates {T,T} | {M,B}: gain = g_root - 0.5 * 0 - 0.5 * 0.5
    root_gain = g_root - 0.5 * 0.5
    # then {M,B} splits with p = 0.5 and gain 0.5
    child_gain = 0.5 * 0.5
    assert tree.root.feature == 0 and tree.root.threshold == 1.5
    total = tree.raw_importance().sum()
    assert total == pytest.approx(root_gain + child_gain)


def test_model_round_trip_and_format_tags():
    rng = np.random.default_rng(5)
    data = ds(rng.random((50, 3)), rng.integers(0, 3, 50))
    for model in (train_decision_tree(data), train_random_forest(data, n_trees=5)):
        text = save_model(model, data.feature_names, {"seed": 0})
        back = load_model(text)
        assert (back.predict(data.X) == model.predict(data.X)).all()
        assert json.loads(text)["format"] == model.format_tag
    assert DecisionTree.format_tag != RandomForest.format_tag
    with pytest.raises(ValueError):
        load_model('{"format": "other"}')


def test_predict_empty_and_wrong_width():
    forest = RandomForest(n_trees=3).fit(np.random.default_rng(0).random((20, 2)),
                                         np.arange(20) % 3)
    assert forest.predict(np.zeros((0, 2))).shape == (0,)
    with pytest.raises(ValueError):
        forest.predict(np.zeros((1, 5)))


def test_metrics_perfect_and_hand_case():
    r = classification_metrics([T, M, B], [T, M, B])
    assert (r.accuracy, r.precision, r.recall, r.f1) == (1.0, 1.0, 1.0, 1.0)
    r = classification_metrics([T, T, M, M, B, B], [T, M, M, M, B, T])
    assert r.accuracy == pytest.approx(4 / 6)
    prec = [1 / 2, 2 / 3, 1.0]
    rec = [1 / 2, 1.0, 1 / 2]
    assert r.precision == pytest.approx(np.mean(prec))
    assert r.recall == pytest.approx(np.mean(rec))
    f1 = [2 * p * q / (p + q) for p, q in zip(prec, rec)]
    assert r.f1 == pytest.approx(np.mean(f1))


def test_majority_baseline_chess_counts():
    y = np.array([T] * 87 + [M] * 690 + [B] * 86)
    r = majority_baseline(y)
    assert r.accuracy == pytest.approx(690 / 863)
    assert r.f1 == pytest.approx((2 * (690 / 863) / (1 + 690 / 863)) / 3)


def test_make_dataset_drops_unlabelled():
    import pandas as pd
    long = pd.DataFrame({"actor": ["a", "b", "c"], "competition": "x", "round": [1, 1, 2],
                         "con1": [1, 2, 3]})
    data = make_dataset(long, {"a": T, "c": B})
    assert data.actors.tolist() == ["a", "c"] and data.y.tolist() == [T, B]
