from __future__ import annotations

import math
from dataclasses import astuple, dataclass

import numpy as np

from ._common import check_X, check_binary_labels, check_width, require_both_classes
from .tree import DecisionTree

EPS_MIN = 1e-10


@dataclass(frozen=True)
class BoostRound:
    error: float
    alpha: float
    weight_sum: float  # after renormalization
    misclassified_mass: float  # after renormalization


class AdaBoost:
    """Discrete AdaBoost over weighted-Gini decision stumps.

    A round whose weighted error reaches 0.5 stops boosting without being
    added. A zero-error round is added with alpha capped at
    0.5 ln((1 - 1e-10) / 1e-10) and also stops boosting.
    """

    family = "adaboost"

    def __init__(self, n_rounds=50, max_depth=1, seed=0):
        if n_rounds < 1:
            raise ValueError("n_rounds must be at least 1")
        self.n_rounds = n_rounds
        self.max_depth = max_depth
        self.seed = seed  # stumps are deterministic; kept for a uniform spec
        self.n_features = None

    def fit(self, X, y):
        X = check_X(X)
        y = check_binary_labels(y, len(X))
        require_both_classes(y)
        n = len(y)
        w = np.full(n, 1.0 / n)
        self.stumps: list[DecisionTree] = []
        self.alphas: list[float] = []
        self.rounds: list[BoostRound] = []
        self.n_features = X.shape[1]
        for _ in range(self.n_rounds):
            stump = DecisionTree(max_depth=self.max_depth).fit(X, y, sample_weight=w)
            miss = stump.predict(X) != y
            eps = float(w[miss].sum())
            if eps >= 0.5:
                if not self.stumps:
                    # nothing better than chance: keep the stump with zero say
                    self.stumps.append(stump)
                    self.alphas.append(0.0)
                break
            perfect = eps <= 0.0
            e = EPS_MIN if perfect else eps
            alpha = 0.5 * math.log((1.0 - e) / e)
            self.stumps.append(stump)
            self.alphas.append(alpha)
            if perfect:
                self.rounds.append(BoostRound(eps, alpha, float(w.sum()), 0.0))
                break
            w = w * np.exp(np.where(miss, alpha, -alpha))
            w /= w.sum()
            self.rounds.append(BoostRound(eps, alpha, float(w.sum()), float(w[miss].sum())))
        return self

    def decision_function(self, X):
        X = check_width(X, self.n_features)
        score = np.zeros(len(X))
        for alpha, stump in zip(self.alphas, self.stumps):
            score += alpha * (2.0 * stump.predict(X) - 1.0)
        return score

    def predict(self, X):
        return (self.decision_function(X) >= 0).astype(np.int64)

    def training_error_bound(self) -> float:
        """Product over rounds of 2 sqrt(eps (1 - eps)).

        A zero-error round contributes with eps = 1e-10, matching its capped alpha.
        """
        eps = [max(r.error, EPS_MIN) for r in self.rounds]
        return math.prod(2.0 * math.sqrt(e * (1.0 - e)) for e in eps)

    def params(self):
        return {
            "n_features": self.n_features,
            "alphas": list(self.alphas),
            "stumps": [s.params() for s in self.stumps],
            "rounds": [list(astuple(r)) for r in self.rounds],
        }

    @classmethod
    def from_params(cls, params, **spec):
        model = cls(**spec)
        model.n_features = params["n_features"]
        model.alphas = list(params["alphas"])
        model.stumps = [DecisionTree.from_params(p, max_depth=model.max_depth)
                        for p in params["stumps"]]
        model.rounds = [BoostRound(*r) for r in params["rounds"]]
        return model
