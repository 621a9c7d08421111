import itertools
import math

import numpy as np
import pytest

from sethreat.models.bayes import BernoulliNB
from sethreat.models.neighbors import KNN, NearestCentroid


def knn_oracle(X, y, k, q):
    order = sorted(range(len(X)), key=lambda i: (sum((a - b) ** 2 for a, b in zip(X[i], q)), i))
    pos = sum(y[i] for i in order[:k])
    return int(pos >= k - pos)


def test_knn_stored_row(rng):
    X = rng.integers(0, 2, size=(15, 6))
    X[3] = [1, 1, 0, 0, 1, 0]
    X = np.unique(X, axis=0)
    y = rng.integers(0, 2, size=len(X))
    model = KNN(k=1).fit(X, y)
    for i, row in enumerate(X):
        assert model.predict(row)[0] == y[i]


def test_knn_k_equals_n_is_global_majority(rng):
    X = rng.integers(0, 2, size=(9, 4))
    y = np.array([1, 1, 1, 1, 1, 0, 0, 0, 0])
    model = KNN(k=9).fit(X, y)
    assert np.all(model.predict(rng.integers(0, 2, size=(20, 4))) == 1)


@pytest.mark.parametrize("seed", range(3))
def test_knn_matches_exhaustive_sort(seed):
    r = np.random.default_rng(seed)
    X = r.integers(0, 2, size=(50, 8))
    y = r.integers(0, 2, size=50)
    Q = r.integers(0, 2, size=(100, 8))
    got = KNN(k=5).fit(X, y).predict(Q)
    expected = [knn_oracle(X.tolist(), y.tolist(), 5, q) for q in Q.tolist()]
    assert got.tolist() == expected


def test_knn_even_k_tie_goes_to_one():
    X = np.array([[0.0], [2.0]])
    assert KNN(k=2).fit(X, [0, 1]).predict([[1.0]])[0] == 1


def test_knn_distance_tie_uses_lower_index():
    X = np.array([[0.0], [2.0]])
    assert KNN(k=1).fit(X, [0, 1]).predict([[1.0]])[0] == 0
    assert KNN(k=1).fit(X, [1, 0]).predict([[1.0]])[0] == 1


def test_knn_errors(rng):
    with pytest.raises(ValueError):
        KNN(k=0)
    with pytest.raises(ValueError):
        KNN(k=4).fit(np.zeros((3, 2)), [0, 1, 0])
    model = KNN(k=1).fit(np.zeros((3, 2)), [0, 1, 0])
    with pytest.raises(ValueError):
        model.predict(np.zeros((1, 3)))


def _centroid_model(c0, c1):
    return NearestCentroid.from_params({"n_features": len(c0), "centroids": [c0, c1]})


def test_centroid_nearest():
    assert _centroid_model([0, 0], [1, 1]).predict([[0.9, 0.9]])[0] == 1
    assert _centroid_model([0, 0], [1, 1]).predict([[0.1, 0.2]])[0] == 0


def test_centroid_tie_goes_to_one():
    assert _centroid_model([0, 0], [1, 1]).predict([[0.5, 0.5]])[0] == 1
    assert _centroid_model([0, 0], [1, 1]).predict([[1.0, 0.0]])[0] == 1


def test_centroids_are_class_means(rng):
    X = rng.integers(0, 2, size=(40, 7))
    y = rng.integers(0, 2, size=40)
    model = NearestCentroid().fit(X, y)
    for c in (0, 1):
        rows = [X[i].tolist() for i in range(40) if y[i] == c]
        means = [sum(col) / len(rows) for col in zip(*rows)]
        assert model.centroids_[c] == pytest.approx(means, abs=1e-12)


def test_centroid_needs_both_classes():
    with pytest.raises(ValueError):
        NearestCentroid().fit(np.eye(3), [1, 1, 1])


# -- naive bayes --------------------------------------------------------------

HAND_X = np.array([[1, 0], [1, 1], [0, 1], [0, 0]])
HAND_Y = np.array([1, 1, 0, 0])


def product_score(prior, theta, x):
    p = prior
    for t, v in zip(theta, x):
        p *= t if v else 1 - t
    return p


def test_hand_example():
    model = BernoulliNB(alpha=1.0).fit(HAND_X, HAND_Y)
    assert model.theta_[1] == pytest.approx([0.75, 0.5])
    assert model.theta_[0] == pytest.approx([0.25, 0.5])
    assert model.class_prior_ == pytest.approx([0.5, 0.5])
    scores = np.exp(model.joint_log_likelihood([[1, 0]])[0])
    assert scores == pytest.approx([0.0625, 0.1875], abs=1e-12)
    assert model.predict([[1, 0]])[0] == 1


def test_symmetric_set_all_zero_query():
    # each feature is set once per class, so both classes score alike
    X = np.array([[1, 1, 0], [1, 0, 1], [0, 0, 1], [0, 1, 0]])
    y = np.array([1, 1, 0, 0])
    model = BernoulliNB().fit(X, y)
    q = [0, 0, 0]
    expected = [product_score(model.class_prior_[c], model.theta_[c], q) for c in (0, 1)]
    assert np.exp(model.joint_log_likelihood([q])[0]) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_posteriors_match_direct_products(seed):
    r = np.random.default_rng(seed)
    X = r.integers(0, 2, size=(12, 5))
    y = r.integers(0, 2, size=12)
    y[:2] = [0, 1]
    model = BernoulliNB(alpha=0.5).fit(X, y)
    assert np.all((model.theta_ > 0) & (model.theta_ < 1))
    for q in itertools.product((0, 1), repeat=5):
        joint = [product_score(model.class_prior_[c], model.theta_[c], q) for c in (0, 1)]
        post = [j / sum(joint) for j in joint]
        got = np.exp(model.predict_log_proba([q])[0])
        assert got == pytest.approx(post, abs=1e-9)
        assert model.predict([q])[0] == int(joint[1] >= joint[0])


def test_theta_formula(rng):
    X = rng.integers(0, 2, size=(30, 4))
    y = rng.integers(0, 2, size=30)
    y[:2] = [0, 1]
    model = BernoulliNB(alpha=2.0).fit(X, y)
    for c in (0, 1):
        n_c = int((y == c).sum())
        for f in range(4):
            ones = int(X[y == c, f].sum())
            assert model.theta_[c, f] == pytest.approx((ones + 2.0) / (n_c + 4.0))
    assert model.class_prior_[1] == pytest.approx(math.fsum(y) / 30)


def test_nb_errors():
    with pytest.raises(ValueError):
        BernoulliNB(alpha=0.0)
    with pytest.raises(ValueError):
        BernoulliNB(alpha=-1.0)
    with pytest.raises(ValueError):
        BernoulliNB().fit(HAND_X, np.ones(4))
