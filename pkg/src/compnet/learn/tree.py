"""CART classification tree with Gini impurity."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

N_CLASSES = 3


def gini(class_counts) -> float:
    """Gini impurity ``1 - sum(p_i ** 2)`` of a class-count vector."""
    c = np.asarray(class_counts, dtype=float)
    total = c.sum()
    if total <= 0:
        raise ValueError("gini of an empty node is undefined")
    p = c / total
    return float(1.0 - np.dot(p, p))


@dataclass
class TreeNode:
    distribution: np.ndarray
    n_samples: int
    impurity: float
    weight: float
    feature: int | None = None
    threshold: float | None = None
    impurity_decrease: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def iter_nodes(self):
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            if not node.is_leaf:
                stack.append(node.right)
                stack.append(node.left)

    def to_dict(self) -> dict:
        d = {
            "distribution": [float(v) for v in self.distribution],
            "n_samples": int(self.n_samples),
            "impurity": float(self.impurity),
            "weight": float(self.weight),
        }
        if not self.is_leaf:
            d.update(feature=int(self.feature), threshold=float(self.threshold),
                     impurity_decrease=float(self.impurity_decrease),
                     left=self.left.to_dict(), right=self.right.to_dict())
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TreeNode":
        node = cls(np.asarray(d["distribution"], dtype=float), d["n_samples"],
                   d["impurity"], d["weight"])
        if "feature" in d:
            node.feature = d["feature"]
            node.threshold = d["threshold"]
            node.impurity_decrease = d["impurity_decrease"]
            node.left = cls.from_dict(d["left"])
            node.right = cls.from_dict(d["right"])
        return node


def resolve_max_features(max_features, n_features: int) -> int:
    if max_features is None or max_features == "all":
        return n_features
    if max_features == "sqrt":
        return max(1, int(np.sqrt(n_features)))
    if max_features == "log2":
        return max(1, int(np.log2(n_features)))
    if isinstance(max_features, float):
        return max(1, min(n_features, int(max_features * n_features)))
    if isinstance(max_features, int):
        return max(1, min(n_features, max_features))
    raise ValueError(f"unsupported max_features {max_features!r}")


def _best_split_on(x, onehot):
    """Best (score, threshold) for one feature; score = sum_k L_k^2/n_L + sum_k R_k^2/n_R."""
    n = x.size
    order = np.argsort(x, kind="stable")
    xs = x[order]
    left = np.cumsum(onehot[order], axis=0)[:-1]
    total = left[-1] + onehot[order[-1]]
    right = total - left
    n_left = np.arange(1, n, dtype=float)
    score = (left ** 2).sum(axis=1) / n_left + (right ** 2).sum(axis=1) / (n - n_left)
    score[xs[:-1] == xs[1:]] = -np.inf
    i = int(np.argmax(score))  # first maximum = lowest threshold
    if not np.isfinite(score[i]):
        return None
    lo, hi = xs[i], xs[i + 1]
    thr = lo + (hi - lo) / 2.0
    if not lo <= thr < hi:
        thr = lo
    return float(score[i]), float(thr)


class DecisionTree:
    """Greedy CART tree.

    Every node takes the (feature, threshold) with the largest weighted Gini
    decrease; candidate thresholds are midpoints of consecutive distinct
    values. Ties go to the lowest feature index, then the lowest threshold.
    Rows with ``x <= threshold`` go left.
    """

    format_tag = "compnet-decision-tree/1"

    def __init__(self, max_depth: int | None = 10, min_samples_split: int = 2,
                 max_features=None, n_classes: int = N_CLASSES, seed: int | None = None):
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.max_features = max_features
        self.n_classes = n_classes
        self.seed = seed
        self.root: TreeNode | None = None
        self.n_features: int | None = None

    def fit(self, X, y, rng: np.random.Generator | None = None) -> "DecisionTree":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=np.int64)
        if len(X) == 0:
            raise ValueError("cannot fit a tree on zero rows")
        self.n_features = X.shape[1]
        k = resolve_max_features(self.max_features, self.n_features)
        if rng is None and k < self.n_features:
            rng = np.random.default_rng(self.seed)
        onehot = np.eye(self.n_classes)[y]
        self._k, self._rng = k, rng
        self.root = self._grow(X, onehot, np.arange(len(y)), 0, len(y))
        del self._k, self._rng
        return self

    def _candidate_features(self):
        p = self.n_features
        if self._k >= p:
            return range(p)
        return np.sort(self._rng.choice(p, self._k, replace=False))

    def _grow(self, X, onehot, idx, depth, n_root):
        counts = onehot[idx].sum(axis=0)
        n = idx.size
        node = TreeNode(counts / n, n, gini(counts), n / n_root)
        if (node.impurity == 0.0
                or n < self.min_samples_split
                or (self.max_depth is not None and depth >= self.max_depth)):
            return node

        best = None
        for f in self._candidate_features():
            found = _best_split_on(X[idx, f], onehot[idx])
            if found is None:
                continue
            # strict improvement keeps the earliest (lowest-index) feature on ties
            if best is None or found[0] > best[0] + 1e-12 * n:
                best = (found[0], found[1], int(f))
        if best is None:
            return node

        score, thr, f = best
        parent = float(np.dot(counts, counts)) / n
        node.feature, node.threshold = f, thr
        node.impurity_decrease = max(0.0, (score - parent) / n)
        go_left = X[idx, f] <= thr
        node.left = self._grow(X, onehot, idx[go_left], depth + 1, n_root)
        node.right = self._grow(X, onehot, idx[~go_left], depth + 1, n_root)
        return node

    def _check(self, X):
        X = np.asarray(X, dtype=float)
        if self.root is None:
            raise RuntimeError("tree is not fitted")
        if X.ndim != 2 or (len(X) and X.shape[1] != self.n_features):
            raise ValueError(f"expected {self.n_features} features, got shape {X.shape}")
        return X

    def predict_proba(self, X) -> np.ndarray:
        X = self._check(X)
        out = np.zeros((len(X), self.n_classes))
        stack = [(self.root, np.arange(len(X)))]
        while stack:
            node, ix = stack.pop()
            if ix.size == 0:
                continue
            if node.is_leaf:
                out[ix] = node.distribution
                continue
            go_left = X[ix, node.feature] <= node.threshold
            stack.append((node.left, ix[go_left]))
            stack.append((node.right, ix[~go_left]))
        return out

    def predict(self, X) -> np.ndarray:
        X = self._check(X)
        if len(X) == 0:
            return np.zeros(0, dtype=np.int64)
        return np.argmax(self.predict_proba(X), axis=1)

    def raw_importance(self) -> np.ndarray:
        """Unnormalised MDI: sum of ``p(t) * delta_I(t)`` over the nodes splitting on each feature."""
        imp = np.zeros(self.n_features)
        for node in self.root.iter_nodes():
            if not node.is_leaf:
                imp[node.feature] += node.weight * node.impurity_decrease
        return imp

    def depth(self) -> int:
        def walk(node):
            return 0 if node.is_leaf else 1 + max(walk(node.left), walk(node.right))
        return walk(self.root)

    def to_dict(self) -> dict:
        return {
            "format": self.format_tag,
            "params": {"max_depth": self.max_depth, "min_samples_split": self.min_samples_split,
                       "max_features": self.max_features, "seed": self.seed},
            "n_classes": self.n_classes,
            "n_features": self.n_features,
            "root": self.root.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionTree":
        if d.get("format") != cls.format_tag:
            raise ValueError(f"not a decision tree model: {d.get('format')!r}")
        tree = cls(n_classes=d["n_classes"], **d["params"])
        tree.n_features = d["n_features"]
        tree.root = TreeNode.from_dict(d["root"])
        return tree
