"""Gini-grown decision trees over binary features.

Each internal node tests one feature: rows with value 0 go left, value 1
goes right.  The same builder backs the single tree, the forest members
(random feature subsets per split) and the boosting stumps (sample
weights).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._common import check_X, check_binary_labels, check_width

GAIN_EPS = 1e-12


def gini_impurity(labels) -> float:
    """Sum over classes of p_k (1 - p_k)."""
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValueError("gini_impurity of an empty multiset")
    _, counts = np.unique(labels, return_counts=True)
    p = counts / labels.size
    return float(np.sum(p * (1.0 - p)))


def _gini_mass(mass, pos):
    """mass * 2 p (1 - p) with p = pos / mass, i.e. 2 pos (mass - pos) / mass; 0 where mass is 0."""
    out = np.zeros_like(mass, dtype=float)
    np.divide(2.0 * pos * (mass - pos), mass, out=out, where=mass > 0)
    return out


def split_scores(X, y, weights=None):
    """Weighted child Gini for splitting on each feature.

    Returns an array of length ``X.shape[1]``; entry f is
    ``(m_left * g_left + m_right * g_right) / m_total`` for the split on f.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.ones(len(y)) if weights is None else np.asarray(weights, dtype=float)
    total = w.sum()
    pos = w @ y
    right = w @ X
    right_pos = (w * y) @ X
    return (_gini_mass(right, right_pos) + _gini_mass(total - right, pos - right_pos)) / total


@dataclass
class TreeNode:
    """Internal node when ``feature`` is set, leaf otherwise."""

    counts: tuple[int, int]
    gini: float
    prediction: int
    depth: int
    feature: int | None = None
    left: TreeNode | None = None
    right: TreeNode | None = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def to_dict(self) -> dict:
        d = {"counts": list(self.counts), "gini": self.gini, "class": self.prediction}
        if not self.is_leaf:
            d.update(feature=self.feature, left=self.left.to_dict(), right=self.right.to_dict())
        return d

    @classmethod
    def from_dict(cls, d: dict, depth: int = 0) -> TreeNode:
        node = cls(tuple(d["counts"]), d["gini"], d["class"], depth)
        if "feature" in d:
            node.feature = d["feature"]
            node.left = cls.from_dict(d["left"], depth + 1)
            node.right = cls.from_dict(d["right"], depth + 1)
        return node


class DecisionTree:
    """Binary-split CART classifier using the Gini index.

    Parameters
    ----------
    max_depth : int or None
        Maximum number of splits on any root-to-leaf path. ``None`` grows
        until leaves are pure or no split lowers the impurity.
    max_features : int or None
        If set, each split considers this many randomly drawn features
        (among those not constant in the node). Requires ``rng``.
    """

    family = "decision_tree"

    def __init__(self, max_depth: int | None = 6, max_features: int | None = None, rng=None):
        if max_depth is not None and max_depth < 0:
            raise ValueError("max_depth must be non-negative")
        self.max_depth = max_depth
        self.max_features = max_features
        self.rng = rng
        self.root: TreeNode | None = None
        self.n_features: int | None = None

    def fit(self, X, y, sample_weight=None) -> DecisionTree:
        X = check_X(X)
        y = check_binary_labels(y, len(X))
        if sample_weight is None:
            w = np.ones(len(y))
        else:
            w = np.asarray(sample_weight, dtype=float)
            if w.shape != y.shape or np.any(w < 0):
                raise ValueError("sample_weight must be non-negative with one entry per row")
        if self.max_features is not None and self.rng is None:
            raise ValueError("max_features requires an rng")
        self.n_features = X.shape[1]
        self.root = self._grow(X.astype(float), y, w, np.arange(len(y)), 0)
        return self

    def _candidates(self, Xn):
        d = Xn.shape[1]
        if self.max_features is None or self.max_features >= d:
            return None
        ones = Xn.sum(axis=0)
        order = self.rng.permutation(d)
        varying = order[(ones[order] > 0) & (ones[order] < len(Xn))]
        return np.sort(varying[: self.max_features])

    def _grow(self, X, y, w, idx, depth) -> TreeNode:
        yn, wn = y[idx], w[idx]
        n_pos = int(yn.sum())
        counts = (len(yn) - n_pos, n_pos)
        mass = wn.sum()
        pos_mass = wn @ yn
        gini = 2.0 * pos_mass * (mass - pos_mass) / (mass * mass) if mass > 0 else 0.0
        node = TreeNode(counts, gini, int(pos_mass >= mass - pos_mass), depth)
        if gini <= GAIN_EPS or (self.max_depth is not None and depth >= self.max_depth):
            return node

        Xn = X[idx]
        cand = self._candidates(Xn)
        if cand is not None:
            if cand.size == 0:
                return node
            scores = split_scores(Xn[:, cand], yn, wn)
        else:
            scores = split_scores(Xn, yn, wn)
        best = int(np.argmin(scores))
        if not scores[best] < gini - GAIN_EPS:
            return node
        feature = int(cand[best]) if cand is not None else best
        goes_right = Xn[:, feature] > 0.5
        node.feature = feature
        node.left = self._grow(X, y, w, idx[~goes_right], depth + 1)
        node.right = self._grow(X, y, w, idx[goes_right], depth + 1)
        return node

    def _route(self, row) -> TreeNode:
        node = self.root
        while not node.is_leaf:
            node = node.right if row[node.feature] > 0.5 else node.left
        return node

    def predict(self, X) -> np.ndarray:
        X = check_width(X, self.n_features)
        out = np.empty(len(X), dtype=np.int64)
        self._predict_into(self.root, X, np.arange(len(X)), out)
        return out

    def _predict_into(self, node, X, idx, out):
        if node.is_leaf:
            out[idx] = node.prediction
            return
        right = X[idx, node.feature] > 0.5
        self._predict_into(node.left, X, idx[~right], out)
        self._predict_into(node.right, X, idx[right], out)

    def apply(self, row) -> TreeNode:
        """Leaf reached by a single row."""
        return self._route(check_width(row, self.n_features)[0])

    def nodes(self) -> list[TreeNode]:
        out, stack = [], [self.root]
        while stack:
            node = stack.pop()
            out.append(node)
            if not node.is_leaf:
                stack.extend((node.right, node.left))
        return out

    @property
    def depth(self) -> int:
        return max(n.depth for n in self.nodes())

    def params(self) -> dict:
        return {"n_features": self.n_features, "root": self.root.to_dict()}

    @classmethod
    def from_params(cls, params: dict, max_depth=6) -> DecisionTree:
        tree = cls(max_depth=max_depth)
        tree.n_features = params["n_features"]
        tree.root = TreeNode.from_dict(params["root"])
        return tree

    def to_dot(self, columns: Sequence[str] | None = None, name: str = "tree") -> str:
        """Graphviz DOT text; internal nodes show the feature column and Gini."""
        lines = [f"digraph {name} {{", '  node [shape=box, fontname="helvetica"];']
        counter = 0

        def visit(node: TreeNode) -> int:
            nonlocal counter
            me = counter
            counter += 1
            if node.is_leaf:
                label = (f"class = {node.prediction}\\ncounts = [{node.counts[0]}, {node.counts[1]}]"
                         f"\\ngini = {node.gini:.4f}")
                lines.append(f'  n{me} [label="{label}", style=filled, fillcolor="#eeeeee"];')
                return me
            col = columns[node.feature] if columns is not None else f"x{node.feature}"
            lines.append(f'  n{me} [label="{col}\\ngini = {node.gini:.4f}"];')
            left = visit(node.left)
            right = visit(node.right)
            lines.append(f'  n{me} -> n{left} [label="0"];')
            lines.append(f'  n{me} -> n{right} [label="1"];')
            return me

        visit(self.root)
        lines.append("}")
        return "\n".join(lines) + "\n"
