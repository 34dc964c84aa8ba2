from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .tree import N_CLASSES, DecisionTree, TreeNode, resolve_max_features


def tree_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for tree ``index``; depends only on (seed, index)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _fit_one(args):
    X, y, index, seed, bootstrap, params = args
    rng = tree_rng(seed, index)
    rows = rng.integers(0, len(y), len(y)) if bootstrap else np.arange(len(y))
    tree = DecisionTree(**params)
    return tree.fit(X[rows], y[rows], rng=rng)


def majority_vote(votes: np.ndarray) -> np.ndarray:
    """Row-wise argmax of an ``(n, n_classes)`` vote-count array; ties go to the lower class."""
    return np.argmax(votes, axis=1)


class RandomForest:
    """Bagged CART trees with per-split feature subsampling and hard majority voting."""

    format_tag = "compnet-random-forest/1"

    def __init__(self, n_trees: int = 100, max_depth: int | None = 10, min_samples_split: int = 2,
                 max_features="sqrt", bootstrap: bool = True, seed: int = 0,
                 n_classes: int = N_CLASSES):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.seed = seed
        self.n_classes = n_classes
        self.trees: list[DecisionTree] = []
        self.n_features: int | None = None

    def fit(self, X, y, n_jobs: int = 1) -> "RandomForest":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=np.int64)
        if len(X) == 0:
            raise ValueError("cannot fit a forest on zero rows")
        self.n_features = X.shape[1]
        self.feature_subsample = resolve_max_features(self.max_features, self.n_features)
        params = dict(max_depth=self.max_depth, min_samples_split=self.min_samples_split,
                      max_features=self.feature_subsample, n_classes=self.n_classes)
        jobs = [(X, y, i, self.seed, self.bootstrap, params) for i in range(self.n_trees)]
        if n_jobs > 1:
            with ProcessPoolExecutor(max_workers=n_jobs) as pool:
                self.trees = list(pool.map(_fit_one, jobs))
        else:
            self.trees = [_fit_one(j) for j in jobs]
        return self

    def votes(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = np.zeros((len(X), self.n_classes), dtype=np.int64)
        rows = np.arange(len(X))
        for tree in self.trees:
            out[rows, tree.predict(X)] += 1
        return out

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if not self.trees:
            raise RuntimeError("forest is not fitted")
        if X.ndim != 2 or (len(X) and X.shape[1] != self.n_features):
            raise ValueError(f"expected {self.n_features} features, got shape {X.shape}")
        if len(X) == 0:
            return np.zeros(0, dtype=np.int64)
        return majority_vote(self.votes(X))

    def predict_proba(self, X) -> np.ndarray:
        return np.mean([t.predict_proba(X) for t in self.trees], axis=0)

    def raw_importance(self) -> np.ndarray:
        return np.mean([t.raw_importance() for t in self.trees], axis=0)

    def to_dict(self) -> dict:
        return {
            "format": self.format_tag,
            "params": {"n_trees": self.n_trees, "max_depth": self.max_depth,
                       "min_samples_split": self.min_samples_split,
                       "max_features": self.max_features, "bootstrap": self.bootstrap,
                       "seed": self.seed},
            "n_classes": self.n_classes,
            "n_features": self.n_features,
            "feature_subsample": getattr(self, "feature_subsample", None),
            "trees": [{"spawn_key": [i], "root": t.root.to_dict()}
                      for i, t in enumerate(self.trees)],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RandomForest":
        if d.get("format") != cls.format_tag:
            raise ValueError(f"not a random forest model: {d.get('format')!r}")
        forest = cls(n_classes=d["n_classes"], **d["params"])
        forest.n_features = d["n_features"]
        forest.feature_subsample = d["feature_subsample"]
        for item in d["trees"]:
            tree = DecisionTree(forest.max_depth, forest.min_samples_split,
                                forest.feature_subsample, forest.n_classes)
            tree.n_features = forest.n_features
            tree.root = TreeNode.from_dict(item["root"])
            forest.trees.append(tree)
        return forest
