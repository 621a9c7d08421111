import json

import numpy as np
import pytest

from sethreat.models import (
    DEFAULT_FAMILIES,
    DEFAULTS,
    FAMILIES,
    ModelSpec,
    WidthMismatch,
    build,
    model_from_json,
    model_to_json,
    predict,
    train,
)

# small settings so every family trains quickly
FAST = {
    "random_forest": {"n_trees": 5},
    "mlp": {"hidden": [6], "epochs": 40},
    "logistic_regression": {"epochs": 50},
    "adaboost": {"n_rounds": 5},
}


@pytest.fixture(scope="module")
def data():
    r = np.random.default_rng(7)
    X = r.integers(0, 2, size=(60, 10))
    y = ((X[:, 0] | X[:, 4]) ^ (r.random(60) < 0.1)).astype(int)
    return X, y, r.integers(0, 2, size=(40, 10))


def _train(family, X, y, seed=3):
    return train(ModelSpec(family, FAST.get(family, {}), seed), X, y, FAST)


def test_nine_default_families():
    assert len(DEFAULT_FAMILIES) == 9
    assert "knn" in FAMILIES and "knn" not in DEFAULT_FAMILIES


def test_every_hyperparameter_has_a_default():
    for fam in FAMILIES:
        assert ModelSpec(fam).params == DEFAULTS[fam]
    assert DEFAULTS["decision_tree"]["max_depth"] == 6


def test_spec_errors():
    with pytest.raises(ValueError):
        ModelSpec("perceptron")
    with pytest.raises(ValueError):
        ModelSpec("svm", {"gamma": 1.0})


@pytest.mark.parametrize("family", FAMILIES)
def test_predict_pure_and_width_checked(family, data):
    X, y, probe = data
    model = _train(family, X, y)
    for row in probe[:5]:
        assert predict(model, row) == predict(model, row)
        assert predict(model, row) in (0, 1)
    with pytest.raises(ValueError):
        predict(model, np.zeros(11))
    with pytest.raises(WidthMismatch):
        model.predict(np.zeros((2, 9)))


@pytest.mark.parametrize("family", FAMILIES)
def test_seed_determinism(family, data):
    X, y, probe = data
    a = _train(family, X, y, seed=21).predict(probe)
    b = _train(family, X, y, seed=21).predict(probe)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("family", FAMILIES)
def test_json_round_trip(family, data):
    X, y, probe = data
    model = _train(family, X, y)
    text = model_to_json(model, layout_hash="abc")
    doc = json.loads(text)
    assert set(doc) == {"family", "spec", "layout_hash", "params"}
    assert doc["family"] == family and doc["layout_hash"] == "abc"
    assert doc["spec"]["seed"] == 3
    back = model_from_json(text)
    assert np.array_equal(back.predict(probe), model.predict(probe))
    assert model_to_json(back, layout_hash="abc") == text


def test_single_leaf_tree_predicts_leaf_class():
    model = train(ModelSpec("decision_tree"), np.eye(3), [1, 1, 1])
    assert all(predict(model, row) == 1 for row in np.eye(3))


def test_knn_stored_row_via_dispatch(data):
    X, y, _ = data
    model = train(ModelSpec("knn", {"k": 1}), X[:1], y[:1])
    assert predict(model, X[0]) == y[0]


def test_build_attaches_spec():
    spec = ModelSpec("svm", {"C": 2.0}, seed=5)
    model = build(spec)
    assert model.spec is spec and model.C == 2.0 and model.seed == 5


def test_voting_members_take_overrides():
    model = build(ModelSpec("voting"), {"mlp": {"epochs": 7}})
    mlp = next(m for m in model.members if m.family == "mlp")
    assert mlp.epochs == 7
