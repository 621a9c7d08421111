import math

import numpy as np

from ._common import check_X, check_binary_labels, check_width, vote
from .tree import DecisionTree


class RandomForest:
    """Bagged Gini trees with a random feature subset at every split.

    ``max_features=None`` means ceil(sqrt(d)). Set ``bootstrap=False`` to
    train every tree on the full training set (useful for testing the
    degenerate one-tree forest against a plain tree).
    """

    family = "random_forest"

    def __init__(self, n_trees=100, max_features=None, max_depth=None, bootstrap=True, seed=0):
        if n_trees < 1:
            raise ValueError("n_trees must be at least 1")
        self.n_trees = n_trees
        self.max_features = max_features
        self.max_depth = max_depth
        self.bootstrap = bootstrap
        self.seed = seed
        self.trees: list[DecisionTree] = []
        self.n_features = None

    def fit(self, X, y):
        X = check_X(X)
        y = check_binary_labels(y, len(X))
        n, d = X.shape
        k = self.max_features if self.max_features is not None else math.ceil(math.sqrt(d))
        self.n_features = d
        self.trees = []
        for child in np.random.SeedSequence(self.seed).spawn(self.n_trees):
            rng = np.random.default_rng(child)
            rows = rng.integers(0, n, size=n) if self.bootstrap else np.arange(n)
            tree = DecisionTree(max_depth=self.max_depth, max_features=k, rng=rng)
            self.trees.append(tree.fit(X[rows], y[rows]))
        return self

    def predict(self, X):
        X = check_width(X, self.n_features)
        pos = np.zeros(len(X), dtype=np.int64)
        for tree in self.trees:
            pos += tree.predict(X)
        return vote(pos, len(self.trees) - pos)

    def params(self):
        return {"n_features": self.n_features, "trees": [t.params() for t in self.trees]}

    @classmethod
    def from_params(cls, params, **spec):
        forest = cls(**spec)
        forest.n_features = params["n_features"]
        forest.trees = [DecisionTree.from_params(p, max_depth=forest.max_depth)
                        for p in params["trees"]]
        return forest
