"""Sigmoid networks trained by full-batch gradient descent on cross-entropy."""

from __future__ import annotations

import numpy as np

from ._common import check_X, check_binary_labels, check_width, require_both_classes


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=float)))


def _cross_entropy_from_logits(z, y):
    # log(1 + e^z) - y z, stable for large |z|
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


class MLP:
    """Fully connected network with sigmoid hidden units and one sigmoid output.

    Parameters
    ----------
    hidden : sequence of int
        Widths of the hidden layers.
    learning_rate : float
    epochs : int
        Number of full-batch gradient steps.
    seed : int
        Seeds the Glorot-uniform weight initialization.
    """

    family = "mlp"

    def __init__(self, hidden=(100,), learning_rate=0.1, epochs=500, seed=0):
        if learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        self.hidden = tuple(int(h) for h in hidden)
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.seed = seed
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        self.n_features = None

    def init_params(self, n_features: int):
        rng = np.random.default_rng(self.seed)
        sizes = (n_features, *self.hidden, 1)
        self.weights, self.biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            self.weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))
        self.n_features = n_features
        return self

    def _forward(self, X):
        acts = [X]
        for W, b in zip(self.weights[:-1], self.biases[:-1]):
            z = acts[-1] @ W
            z += b
            # in-place sigmoid, same formula as sigmoid()
            z *= 0.5
            np.tanh(z, out=z)
            z += 1.0
            z *= 0.5
            acts.append(z)
        logits = (acts[-1] @ self.weights[-1] + self.biases[-1])[:, 0]
        return acts, logits

    def _backprop(self, acts, logits, y, XT):
        """Gradients ordered like ``weights`` / ``biases``; ``XT`` is the input transposed."""
        delta = ((sigmoid(logits) - y) / len(y))[:, None]
        gW = [None] * len(self.weights)
        gb = [None] * len(self.biases)
        for layer in range(len(self.weights) - 1, -1, -1):
            gW[layer] = (XT if layer == 0 else acts[layer].T) @ delta
            gb[layer] = delta.sum(axis=0)
            if layer:
                a = acts[layer]
                delta = (delta @ self.weights[layer].T) * a * (1.0 - a)
        return gW, gb

    def loss_and_grad(self, X, y):
        """Mean cross-entropy and its gradients, ordered like ``weights`` / ``biases``."""
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        acts, logits = self._forward(X)
        gW, gb = self._backprop(acts, logits, y, X.T)
        return _cross_entropy_from_logits(logits, y), gW, gb

    def fit(self, X, y):
        X = check_X(X)
        y = check_binary_labels(y, len(X))
        if len(y) < 2:
            raise ValueError("MLP training needs at least two rows")
        require_both_classes(y)
        self.init_params(X.shape[1])
        XT = np.ascontiguousarray(X.T)
        target = y.astype(float)
        lr = self.learning_rate
        for _ in range(self.epochs):
            gW, gb = self._backprop(*self._forward(X), target, XT)
            for W, g in zip(self.weights, gW):
                W -= lr * g
            for b, g in zip(self.biases, gb):
                b -= lr * g
        return self

    def predict_proba(self, X):
        X = check_width(X, self.n_features)
        return sigmoid(self._forward(X)[1])

    def predict(self, X):
        return (self.predict_proba(X) >= 0.5).astype(np.int64)

    def params(self):
        return {
            "n_features": self.n_features,
            "weights": [W.tolist() for W in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_params(cls, params, **spec):
        model = cls(**spec)
        model.n_features = params["n_features"]
        model.weights = [np.asarray(W, dtype=float) for W in params["weights"]]
        model.biases = [np.asarray(b, dtype=float) for b in params["biases"]]
        return model


class LogisticRegression:
    """y = sigmoid(w.x + b), fit by gradient descent with optional L2 on w."""

    family = "logistic_regression"

    def __init__(self, learning_rate=0.1, epochs=1000, l2=0.0):
        if learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if l2 < 0:
            raise ValueError("l2 must be non-negative")
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.l2 = l2
        self.n_features = None

    def init_params(self, n_features: int):
        self.coef_ = np.zeros(n_features)
        self.intercept_ = 0.0
        self.n_features = n_features
        return self

    def loss_and_grad(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        z = X @ self.coef_ + self.intercept_
        loss = _cross_entropy_from_logits(z, y) + 0.5 * self.l2 * float(self.coef_ @ self.coef_)
        r = (sigmoid(z) - y) / len(y)
        return loss, X.T @ r + self.l2 * self.coef_, float(r.sum())

    def fit(self, X, y):
        X = check_X(X)
        y = check_binary_labels(y, len(X))
        require_both_classes(y)
        self.init_params(X.shape[1])
        for _ in range(self.epochs):
            _, gw, gb = self.loss_and_grad(X, y)
            self.coef_ -= self.learning_rate * gw
            self.intercept_ -= self.learning_rate * gb
        return self

    def predict_proba(self, X):
        X = check_width(X, self.n_features)
        return sigmoid(X @ self.coef_ + self.intercept_)

    def predict(self, X):
        return (self.predict_proba(X) >= 0.5).astype(np.int64)

    def params(self):
        return {"n_features": self.n_features, "coef": self.coef_.tolist(),
                "intercept": self.intercept_}

    @classmethod
    def from_params(cls, params, **spec):
        model = cls(**spec)
        model.n_features = params["n_features"]
        model.coef_ = np.asarray(params["coef"], dtype=float)
        model.intercept_ = float(params["intercept"])
        return model
