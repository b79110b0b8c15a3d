import random
from fractions import Fraction

import pytest

from privacyguard import TreeHyper, train_decision_tree
from privacyguard.classifiers.tree import (
    DecisionTreeModel,
    Leaf,
    Split,
    best_split,
    gini_impurity,
    tree_from_dict,
    tree_to_dict,
    validate_tree,
)


def test_gini_known_values():
    assert gini_impurity([0, 0, 0]) == 0.0
    assert gini_impurity([1, 1]) == 0.0
    assert gini_impurity([0, 1]) == 0.5
    assert abs(gini_impurity([1, 1, 1, 0]) - 0.375) < 1e-15
    assert abs(gini_impurity([0, 0, 1]) - 4 / 9) < 1e-15


def test_gini_rejects_empty_and_bad_labels():
    with pytest.raises(ValueError):
        gini_impurity([])
    with pytest.raises(ValueError):
        gini_impurity([0, 2])


def exhaustive_root_split(x, y):
    """Exact-arithmetic oracle: argmin over features of weighted child Gini.

    Uses Fractions throughout so float rounding cannot influence the winner;
    ties resolve to the lowest index, mirroring the documented rule.
    """
    n = len(y)
    best_feature = None
    best_score = None
    for f in range(len(x[0])):
        left = [y[i] for i in range(n) if x[i][f] == 0]
        right = [y[i] for i in range(n) if x[i][f] == 1]
        if not left or not right:
            continue

        def frac_gini(labels):
            ones = Fraction(sum(labels), len(labels))
            return 1 - ones * ones - (1 - ones) * (1 - ones)

        score = (len(left) * frac_gini(left) + len(right) * frac_gini(right)) / n
        if best_score is None or score < best_score:
            best_feature = f
            best_score = score
    return best_feature


def test_root_split_matches_exhaustive_oracle():
    rng = random.Random(99)
    checked = 0
    while checked < 60:
        n = rng.randrange(4, 33)
        d = rng.randrange(2, 7)
        x = [[rng.randrange(2) for _ in range(d)] for _ in range(n)]
        y = [rng.randrange(2) for _ in range(n)]
        expected = exhaustive_root_split(x, y)
        if expected is None or len(set(y)) == 1:
            continue  # no split exists or the root is already pure
        model = train_decision_tree(x, y)
        assert isinstance(model.root, Split)
        assert model.root.feature_index == expected
        checked += 1


def test_single_informative_feature_gives_depth_one_tree():
    x = [[0, 0], [0, 1], [1, 0], [1, 1]]
    y = [0, 0, 1, 1]
    model = train_decision_tree(x, y)
    assert isinstance(model.root, Split)
    assert model.root.feature_index == 0
    assert isinstance(model.root.left, Leaf) and model.root.left.label == 0
    assert isinstance(model.root.right, Leaf) and model.root.right.label == 1


def test_depth_one_prediction_routes_on_split_feature_only():
    leaf0, leaf1 = Leaf(label=0), Leaf(label=1)
    model = DecisionTreeModel(
        root=Split(feature_index=2, left=leaf0, right=leaf1),
        schema_hash="",
        hyper=TreeHyper(),
        n_features=4,
    )
    for a in (0, 1):
        for b in (0, 1):
            for c in (0, 1):
                assert model.predict([a, b, 0, c]) == 0
                assert model.predict([a, b, 1, c]) == 1


def test_xor_is_reproduced_exactly():
    # no single feature helps, yet two levels solve it
    x = [[0, 0], [0, 1], [1, 0], [1, 1]]
    y = [0, 1, 1, 0]
    model = train_decision_tree(x, y)
    assert [model.predict(v) for v in x] == y


def test_consistent_data_is_fit_exactly():
    rng = random.Random(31)
    for _ in range(20):
        d = rng.randrange(2, 6)
        n = rng.randrange(4, 40)
        rows = [tuple(rng.randrange(2) for _ in range(d)) for _ in range(n)]
        truth = {row: rng.randrange(2) for row in set(rows)}
        x = [list(row) for row in rows]
        y = [truth[row] for row in rows]
        model = train_decision_tree(x, y)
        assert [model.predict(v) for v in x] == y


def test_tie_on_split_score_picks_lowest_index():
    # both features separate identically by symmetry
    x = [[0, 0], [1, 1]]
    y = [0, 1]
    model = train_decision_tree(x, y)
    assert model.root.feature_index == 0


def test_leaf_majority_tie_is_invasive():
    # one row each way and no feature splits them apart
    x = [[0], [0]]
    y = [0, 1]
    model = train_decision_tree(x, y)
    assert isinstance(model.root, Leaf)
    assert model.root.label == 1


def test_max_depth_stops_growth():
    x = [[0, 0], [0, 1], [1, 0], [1, 1]]
    y = [0, 1, 1, 0]
    model = train_decision_tree(x, y, TreeHyper(max_depth=1))
    assert isinstance(model.root, Split)
    assert isinstance(model.root.left, Leaf)
    assert isinstance(model.root.right, Leaf)


def test_max_depth_zero_gives_single_leaf():
    model = train_decision_tree([[0], [1]], [0, 1], TreeHyper(max_depth=0))
    assert isinstance(model.root, Leaf)


def test_min_samples_stops_growth():
    x = [[0, 0], [0, 1], [1, 0], [1, 1]]
    y = [0, 1, 1, 0]
    model = train_decision_tree(x, y, TreeHyper(min_samples=5))
    assert isinstance(model.root, Leaf)
    assert model.root.label == 1  # 2 vs 2 tie goes to class 1


def test_no_path_tests_a_feature_twice():
    rng = random.Random(8)
    x = [[rng.randrange(2) for _ in range(5)] for _ in range(32)]
    y = [rng.randrange(2) for _ in range(32)]
    model = train_decision_tree(x, y)

    def walk(node, used):
        if isinstance(node, Leaf):
            return
        assert node.feature_index not in used
        walk(node.left, used | {node.feature_index})
        walk(node.right, used | {node.feature_index})

    walk(model.root, set())
    validate_tree(model.root, 5)  # the library checker agrees


def test_pure_data_gives_leaf_without_splits():
    model = train_decision_tree([[0, 1], [1, 0], [1, 1]], [1, 1, 1])
    assert model.root == Leaf(1)


def test_fit_rejects_bad_inputs():
    with pytest.raises(ValueError):
        train_decision_tree([], [])
    with pytest.raises(ValueError):
        train_decision_tree([[0, 2]], [0])
    with pytest.raises(ValueError):
        train_decision_tree([[0], [1]], [0, 3])
    with pytest.raises(ValueError):
        train_decision_tree([[0], [1, 0]], [0, 1])


def test_predict_rejects_wrong_length():
    model = train_decision_tree([[0, 1], [1, 0]], [0, 1])
    with pytest.raises(ValueError):
        model.predict([1])


def test_tree_dict_round_trip():
    x = [[0, 0], [0, 1], [1, 0], [1, 1]]
    y = [0, 1, 1, 0]
    model = train_decision_tree(x, y)
    rebuilt = tree_from_dict(tree_to_dict(model.root))
    assert rebuilt == model.root


def test_tree_from_dict_rejects_malformed():
    with pytest.raises(ValueError):
        tree_from_dict({"feature_index": 0, "left": {"class": 0}})  # no right
    with pytest.raises(ValueError):
        tree_from_dict({"class": 2})
    with pytest.raises(ValueError):
        tree_from_dict({"feature_index": -1, "left": {"class": 0}, "right": {"class": 1}})
    with pytest.raises(ValueError):
        tree_from_dict("leaf")


def test_validate_tree_catches_out_of_range_and_repeats():
    bad_range = Split(feature_index=3, left=Leaf(0), right=Leaf(1))
    with pytest.raises(ValueError):
        validate_tree(bad_range, 2)
    repeated = Split(0, Split(0, Leaf(0), Leaf(1)), Leaf(1))
    with pytest.raises(ValueError):
        validate_tree(repeated, 3)
