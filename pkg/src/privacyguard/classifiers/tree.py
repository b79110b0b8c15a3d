"""Decision tree over binary features, grown by recursive Gini splitting.

Branches are two-way (feature value 0 goes left, 1 goes right) and a feature
is consumed once used, so no root-to-leaf path tests the same index twice.
Ties everywhere resolve the same way: equal split scores pick the lowest
feature index, equal leaf counts pick class 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


def gini_impurity(labels) -> float:
    """1 - p0^2 - p1^2 over a non-empty collection of 0/1 labels."""
    labels = list(labels)
    if not labels:
        raise ValueError("gini impurity of an empty label set is undefined")
    ones = 0
    for value in labels:
        if value not in (0, 1):
            raise ValueError(f"labels must be 0 or 1, got {value!r}")
        ones += value
    p1 = ones / len(labels)
    p0 = 1.0 - p1
    return 1.0 - p0 * p0 - p1 * p1


@dataclass(frozen=True)
class Leaf:
    label: int


@dataclass(frozen=True)
class Split:
    feature_index: int
    left: "Node"   # feature value 0
    right: "Node"  # feature value 1


Node = Union[Split, Leaf]


@dataclass(frozen=True)
class TreeHyper:
    max_depth: int | None = None  # None grows until features run out
    min_samples: int = 2          # nodes smaller than this become leaves


@dataclass
class DecisionTreeModel:
    root: Node
    schema_hash: str = ""
    hyper: TreeHyper = TreeHyper()
    n_features: int = 0

    def predict(self, vector) -> int:
        if len(vector) != self.n_features:
            raise ValueError(
                f"feature vector has length {len(vector)}, model expects {self.n_features}"
            )
        node = self.root
        while isinstance(node, Split):
            node = node.right if vector[node.feature_index] == 1 else node.left
        return node.label


def best_split(x, y, allowed) -> tuple[int, float] | None:
    """Feature minimizing the weighted child Gini impurity.

    Only features that actually separate the rows (both sides non-empty)
    count. Iterating indices in ascending order with a strict comparison
    makes exact ties land on the lowest index. Returns None when nothing
    splits.
    """
    n = len(y)
    best: tuple[int, float] | None = None
    for f in sorted(allowed):
        left = [y[i] for i in range(n) if x[i][f] == 0]
        right = [y[i] for i in range(n) if x[i][f] == 1]
        if not left or not right:
            continue
        score = (len(left) * gini_impurity(left) + len(right) * gini_impurity(right)) / n
        if best is None or score < best[1]:
            best = (f, score)
    return best


def _majority(labels) -> int:
    ones = sum(labels)
    return 1 if ones >= len(labels) - ones else 0


def _grow(x, y, allowed, depth, hyper: TreeHyper) -> Node:
    if len(set(y)) == 1:
        return Leaf(y[0])
    if hyper.max_depth is not None and depth >= hyper.max_depth:
        return Leaf(_majority(y))
    if len(y) < hyper.min_samples:
        return Leaf(_majority(y))
    found = best_split(x, y, allowed)
    if found is None:
        return Leaf(_majority(y))
    f = found[0]
    left_x, left_y, right_x, right_y = [], [], [], []
    for row, label in zip(x, y):
        if row[f] == 0:
            left_x.append(row)
            left_y.append(label)
        else:
            right_x.append(row)
            right_y.append(label)
    remaining = allowed - {f}
    return Split(
        feature_index=f,
        left=_grow(left_x, left_y, remaining, depth + 1, hyper),
        right=_grow(right_x, right_y, remaining, depth + 1, hyper),
    )


def train_decision_tree(x, y, hyper: TreeHyper = TreeHyper()) -> DecisionTreeModel:
    """Grow a tree by repeatedly taking the best Gini split.

    A split is taken whenever any unused feature separates the rows, even at
    zero immediate gain; parity-style labelings (where no single feature
    helps on its own) still get fit exactly that way. Growth stops at purity,
    at max_depth or min_samples, or when no feature separates the node.
    """
    rows = [list(row) for row in x]
    labels = list(y)
    if not rows:
        raise ValueError("cannot fit a tree to an empty dataset")
    width = len(rows[0])
    if width == 0:
        raise ValueError("feature vectors must be non-empty")
    for row in rows:
        if len(row) != width:
            raise ValueError("feature vectors must all have the same length")
        for value in row:
            if value not in (0, 1):
                raise ValueError(f"features must be 0 or 1, got {value!r}")
    if len(labels) != len(rows):
        raise ValueError(f"got {len(rows)} samples but {len(labels)} labels")
    for value in labels:
        if value not in (0, 1):
            raise ValueError(f"labels must be 0 or 1, got {value!r}")

    root = _grow(rows, labels, set(range(width)), 0, hyper)
    return DecisionTreeModel(root=root, hyper=hyper, n_features=width)


def tree_to_dict(node: Node) -> dict:
    """Nested plain-dict form: {"class": c} leaves, {"feature_index", "left", "right"} splits."""
    if isinstance(node, Leaf):
        return {"class": node.label}
    return {
        "feature_index": node.feature_index,
        "left": tree_to_dict(node.left),
        "right": tree_to_dict(node.right),
    }


def tree_from_dict(doc) -> Node:
    """Rebuild a tree from its dict form; malformed shapes raise ValueError."""
    if not isinstance(doc, dict):
        raise ValueError("tree node must be an object")
    if "class" in doc:
        label = doc["class"]
        if label not in (0, 1) or isinstance(label, bool):
            raise ValueError(f"leaf class must be 0 or 1, got {label!r}")
        return Leaf(label)
    if "feature_index" not in doc or "left" not in doc or "right" not in doc:
        raise ValueError("split node needs feature_index, left, and right")
    index = doc["feature_index"]
    if not isinstance(index, int) or isinstance(index, bool) or index < 0:
        raise ValueError(f"feature_index must be a non-negative integer, got {index!r}")
    return Split(
        feature_index=index,
        left=tree_from_dict(doc["left"]),
        right=tree_from_dict(doc["right"]),
    )


def validate_tree(node: Node, n_features: int, _used: frozenset[int] = frozenset()) -> None:
    """Check index bounds and once-per-path feature use; raises ValueError."""
    if isinstance(node, Leaf):
        return
    if node.feature_index >= n_features:
        raise ValueError(
            f"feature_index {node.feature_index} is out of range for {n_features} features"
        )
    if node.feature_index in _used:
        raise ValueError(f"feature_index {node.feature_index} repeats along a path")
    used = _used | {node.feature_index}
    validate_tree(node.left, n_features, used)
    validate_tree(node.right, n_features, used)
