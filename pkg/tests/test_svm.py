import itertools
import math

import numpy as np
import pytest

from sethreat.models.svm import SVM, gram, kernel_eval

XOR_X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
XOR_Y = np.array([0, 1, 1, 0])


def test_linear_kernel():
    assert kernel_eval("linear", [1, 0, 1], [1, 1, 0]) == 1.0


@pytest.mark.parametrize("sigma", [0.1, 1.0, 7.5])
def test_gaussian_self_similarity(sigma):
    x = [0.3, -1.0, 2.0]
    assert kernel_eval("gaussian", x, x, sigma=sigma) == pytest.approx(1.0, abs=1e-15)


def test_polynomial_kernel():
    assert kernel_eval("polynomial", [1, 0], [1, 5], a=1, c=1, degree=2) == 4.0


def test_gaussian_value():
    got = kernel_eval("gaussian", [1, 0, 1], [0, 0, 0], sigma=2.0)
    assert got == pytest.approx(math.exp(-2 / 8))


def test_kernel_errors():
    with pytest.raises(ValueError):
        kernel_eval("linear", [1, 0], [1, 0, 1])
    with pytest.raises(ValueError):
        kernel_eval("gaussian", [1], [1], sigma=0.0)
    with pytest.raises(ValueError):
        kernel_eval("gaussian", [1], [1], sigma=-1.0)


def test_gram_matches_pairwise(rng):
    A, B = rng.integers(0, 2, size=(6, 5)), rng.integers(0, 2, size=(4, 5))
    G = gram("gaussian", A.astype(float), B.astype(float), sigma=1.3)
    for i, j in itertools.product(range(6), range(4)):
        assert G[i, j] == pytest.approx(kernel_eval("gaussian", A[i], B[j], sigma=1.3), abs=1e-12)


def test_separable_pair():
    X = np.array([[1.0, 0.0], [0.0, 1.0]])
    model = SVM(kernel="linear", C=1.0).fit(X, [1, 0])
    f = model.decision_function(X)
    assert f[0] > 0 > f[1]
    assert model.predict(X).tolist() == [1, 0]


def test_xor_gaussian():
    model = SVM(kernel="gaussian", sigma=1.0, C=10.0).fit(XOR_X, XOR_Y)
    assert np.mean(model.predict(XOR_X) == XOR_Y) == 1.0


def test_xor_linear_bounded_by_brute_force():
    # oracle: best accuracy of any linear threshold on the XOR points
    best = 0
    grid = np.linspace(-2, 2, 41)
    for w1, w2, b in itertools.product(grid, grid, grid):
        pred = (XOR_X @ [w1, w2] + b >= 0).astype(int)
        best = max(best, int((pred == XOR_Y).sum()))
    assert best == 3
    model = SVM(kernel="linear", C=10.0).fit(XOR_X, XOR_Y)
    assert np.mean(model.predict(XOR_X) == XOR_Y) <= best / 4


def test_single_class_rejected():
    with pytest.raises(ValueError):
        SVM().fit(XOR_X, np.ones(4, dtype=int))


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("kernel", ["gaussian", "linear"])
def test_box_and_margin_conditions(seed, kernel):
    r = np.random.default_rng(seed)
    X = r.integers(0, 2, size=(80, 12)).astype(float)
    y = ((X[:, 0] + X[:, 1] + X[:, 2] >= 2) ^ (r.random(80) < 0.1)).astype(int)
    C = 1.0
    model = SVM(kernel=kernel, C=C, seed=seed).fit(X, y)
    alpha = model.dual_
    assert np.all(alpha >= -1e-8) and np.all(alpha <= C + 1e-8)
    t = np.where(y == 1, 1.0, -1.0)
    f = model.decision_function(X)
    free = (alpha > 1e-8) & (alpha < C - 1e-8)
    assert np.all(np.abs(t[free] * f[free] - 1.0) <= 0.1)
    # the dual equality constraint
    assert abs(float(alpha @ t)) <= 1e-8


def test_default_sigma_from_width(rng):
    X = rng.integers(0, 2, size=(30, 18)).astype(float)
    y = np.arange(30) % 2
    model = SVM().fit(X, y)
    assert 1.0 / (2.0 * model.sigma_ ** 2) == pytest.approx(1.0 / 18)


def test_seed_determinism(rng):
    X = rng.integers(0, 2, size=(60, 10)).astype(float)
    y = rng.integers(0, 2, size=60)
    a = SVM(seed=5).fit(X, y)
    b = SVM(seed=5).fit(X, y)
    assert np.array_equal(a.dual_, b.dual_) and a.b_ == b.b_


def test_width_mismatch():
    model = SVM(kernel="gaussian", sigma=1.0).fit(XOR_X, XOR_Y)
    with pytest.raises(ValueError):
        model.predict(np.zeros((1, 3)))


def test_params_round_trip(rng):
    X = rng.integers(0, 2, size=(40, 6)).astype(float)
    y = rng.integers(0, 2, size=40)
    model = SVM().fit(X, y)
    back = SVM.from_params(model.params())
    assert np.array_equal(back.decision_function(X), model.decision_function(X))
