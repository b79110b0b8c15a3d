"""The three classifier families: logistic regression, decision tree, linear SVM."""

from .logistic import (
    LogisticHyper,
    LogisticModel,
    log_loss,
    logistic,
    loss_gradient,
    train_logistic,
)
from .svm import SvmHyper, SvmModel, hinge_objective, train_linear_svm
from .tree import (
    DecisionTreeModel,
    Leaf,
    Node,
    Split,
    TreeHyper,
    best_split,
    gini_impurity,
    train_decision_tree,
    tree_from_dict,
    tree_to_dict,
    validate_tree,
)

__all__ = [
    "LogisticHyper",
    "LogisticModel",
    "log_loss",
    "logistic",
    "loss_gradient",
    "train_logistic",
    "SvmHyper",
    "SvmModel",
    "hinge_objective",
    "train_linear_svm",
    "DecisionTreeModel",
    "Leaf",
    "Node",
    "Split",
    "TreeHyper",
    "best_split",
    "gini_impurity",
    "train_decision_tree",
    "tree_from_dict",
    "tree_to_dict",
    "validate_tree",
]
