"""Tree-based node classification: CART, random forest, MDI importance, metrics."""
from __future__ import annotations

import json

import numpy as np

from .dataset import Dataset, make_dataset, make_wide_dataset, temporal_split
from .forest import RandomForest, majority_vote, tree_rng
from .metrics import MetricsReport, classification_metrics, confusion_matrix, majority_baseline
from .tree import DecisionTree, TreeNode, gini

__all__ = [
    "Dataset", "DecisionTree", "MetricsReport", "RandomForest", "TreeNode",
    "classification_metrics", "confusion_matrix", "gini", "load_model", "majority_baseline",
    "majority_vote", "make_dataset", "make_wide_dataset", "mdi_importance", "predict",
    "save_model", "temporal_split", "train_decision_tree", "train_random_forest", "tree_rng",
]

DEFAULTS = {"n_trees": 100, "max_depth": 10, "min_samples_split": 2, "feature_subsample": "sqrt"}


def train_decision_tree(train: Dataset, max_depth: int | None = 10, min_samples_split: int = 2,
                        seed: int | None = 0) -> DecisionTree:
    return DecisionTree(max_depth, min_samples_split, seed=seed).fit(train.X, train.y)


def train_random_forest(train: Dataset, n_trees: int = 100, max_depth: int | None = 10,
                        feature_subsample="sqrt", seed: int = 0, *, bootstrap: bool = True,
                        min_samples_split: int = 2, n_jobs: int = 1) -> RandomForest:
    forest = RandomForest(n_trees, max_depth, min_samples_split, feature_subsample,
                          bootstrap, seed)
    return forest.fit(train.X, train.y, n_jobs=n_jobs)


def predict(model, rows) -> np.ndarray:
    return model.predict(rows)


def mdi_importance(model) -> np.ndarray:
    """Mean decrease in impurity per feature, averaged over trees and scaled to sum to 1.

    A model without any split returns all zeros.
    """
    raw = model.raw_importance()
    total = raw.sum()
    return raw / total if total > 0 else raw


def save_model(model, feature_names=None, extra: dict | None = None) -> str:
    d = model.to_dict()
    if feature_names is not None:
        d["feature_names"] = list(feature_names)
    if extra:
        d["run"] = extra
    return json.dumps(d, sort_keys=True)


def load_model(text: str):
    d = json.loads(text)
    fmt = d.get("format")
    if fmt == DecisionTree.format_tag:
        return DecisionTree.from_dict(d)
    if fmt == RandomForest.format_tag:
        return RandomForest.from_dict(d)
    raise ValueError(f"unknown model format {fmt!r}")
