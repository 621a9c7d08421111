"""Classifier families, their default hyperparameters and persistence.

Every family exposes ``fit(X, y)`` and ``predict(X)`` over binary feature
rows with labels in {0, 1}. :class:`ModelSpec` pins a family, its full
hyperparameter set and a seed, so any trained model is reproducible from
its spec alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ._common import WidthMismatch, check_width
from .bayes import BernoulliNB
from .boosting import AdaBoost
from .forest import RandomForest
from .neighbors import KNN, NearestCentroid
from .neural import MLP, LogisticRegression
from .svm import SVM, kernel_eval
from .tree import DecisionTree, TreeNode, gini_impurity
from .voting import HardVoting

# Order fixes the family ordinal used in seed derivation.
FAMILIES = (
    "decision_tree",
    "random_forest",
    "svm",
    "mlp",
    "logistic_regression",
    "nearest_centroid",
    "naive_bayes",
    "adaboost",
    "voting",
    "knn",
)
# The nine families compared per feature combination; knn is available on request.
DEFAULT_FAMILIES = FAMILIES[:9]
VOTING_MEMBERS = ("decision_tree", "nearest_centroid", "mlp", "svm", "naive_bayes")

DEFAULTS: dict[str, dict[str, Any]] = {
    "decision_tree": {"max_depth": 6},
    "random_forest": {"n_trees": 100, "max_features": None, "max_depth": None, "bootstrap": True},
    "svm": {"kernel": "gaussian", "C": 1.0, "sigma": None, "a": 1.0, "c": 1.0, "degree": 3,
            "tol": 1e-3, "max_passes": 20},
    "mlp": {"hidden": [100], "learning_rate": 0.1, "epochs": 500},
    "logistic_regression": {"learning_rate": 0.1, "epochs": 1000, "l2": 0.0},
    "knn": {"k": 5},
    "nearest_centroid": {},
    "naive_bayes": {"alpha": 1.0},
    "adaboost": {"n_rounds": 50, "max_depth": 1},
    "voting": {"members": list(VOTING_MEMBERS)},
}

_CLASSES = {
    "decision_tree": DecisionTree,
    "random_forest": RandomForest,
    "svm": SVM,
    "mlp": MLP,
    "logistic_regression": LogisticRegression,
    "knn": KNN,
    "nearest_centroid": NearestCentroid,
    "naive_bayes": BernoulliNB,
    "adaboost": AdaBoost,
}
_SEEDED = {"random_forest", "svm", "mlp", "adaboost"}


@dataclass(frozen=True)
class ModelSpec:
    family: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.family not in DEFAULTS:
            raise ValueError(f"unknown model family {self.family!r}; expected one of {FAMILIES}")
        unknown = set(self.params) - set(DEFAULTS[self.family])
        if unknown:
            raise ValueError(f"unknown {self.family} hyperparameter(s): {sorted(unknown)}")
        merged = {**DEFAULTS[self.family], **self.params}
        object.__setattr__(self, "params", merged)

    def to_dict(self) -> dict:
        return {"family": self.family, "params": dict(self.params), "seed": self.seed}


def _member_seeds(seed: int, n: int) -> list[int]:
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(c.generate_state(1, dtype=np.uint32)[0]) for c in children]


def build(spec: ModelSpec, overrides: dict[str, dict] | None = None):
    """Instantiate an untrained model for ``spec``.

    ``overrides`` maps member family -> hyperparameters and is only used to
    configure the voting members.
    """
    if spec.family == "voting":
        overrides = overrides or {}
        members = spec.params["members"]
        seeds = _member_seeds(spec.seed, len(members))
        model = HardVoting([
            build(ModelSpec(fam, overrides.get(fam, {}), s)) for fam, s in zip(members, seeds)
        ])
    else:
        model = _CLASSES[spec.family](**_init_kwargs(spec))
    model.spec = spec
    return model


def _init_kwargs(spec: ModelSpec) -> dict:
    kwargs = dict(spec.params)
    if spec.family == "mlp":
        kwargs["hidden"] = tuple(kwargs["hidden"])
    if spec.family in _SEEDED:
        kwargs["seed"] = spec.seed
    return kwargs


def train(spec: ModelSpec, X, y, overrides: dict[str, dict] | None = None):
    return build(spec, overrides).fit(X, y)


def predict(model, row) -> int:
    """Class of a single row."""
    row = np.asarray(row, dtype=float)
    if row.ndim != 1:
        raise ValueError("predict takes a single row; use model.predict for matrices")
    return int(model.predict(row[None, :])[0])


def model_to_json(model, layout_hash: str = "") -> str:
    """One JSON document holding the spec and the learned parameters."""
    spec: ModelSpec = model.spec
    doc = {"family": spec.family, "spec": spec.to_dict(), "layout_hash": layout_hash}
    if isinstance(model, HardVoting):
        doc["params"] = {
            "n_features": model.n_features,
            "members": [{"spec": m.spec.to_dict(), "params": m.params()} for m in model.members],
        }
    else:
        doc["params"] = model.params()
    return json.dumps(doc, sort_keys=True)


def _restore(spec: ModelSpec, params: dict):
    if spec.family == "voting":
        members = [
            _restore(ModelSpec(m["spec"]["family"], m["spec"]["params"], m["spec"]["seed"]),
                     m["params"])
            for m in params["members"]
        ]
        model = HardVoting(members)
        model.n_features = params["n_features"]
    else:
        model = _CLASSES[spec.family].from_params(params, **_init_kwargs(spec))
    model.spec = spec
    return model


def model_from_json(text: str):
    doc = json.loads(text)
    spec = ModelSpec(doc["family"], doc["spec"]["params"], doc["spec"]["seed"])
    return _restore(spec, doc["params"])


__all__ = [
    "AdaBoost", "BernoulliNB", "DEFAULTS", "DEFAULT_FAMILIES", "DecisionTree", "FAMILIES",
    "HardVoting", "KNN", "LogisticRegression", "MLP", "ModelSpec", "NearestCentroid",
    "RandomForest", "SVM", "TreeNode", "VOTING_MEMBERS", "WidthMismatch", "build",
    "check_width", "gini_impurity", "kernel_eval", "model_from_json", "model_to_json",
    "predict", "train",
]
