import numpy as np

from ._common import check_X, check_binary_labels, check_width, require_both_classes


class BernoulliNB:
    """Naive Bayes with a Bernoulli event model and additive smoothing.

    theta[c, f] = (count(x_f = 1 in class c) + alpha) / (n_c + 2 alpha)
    """

    family = "naive_bayes"

    def __init__(self, alpha=1.0):
        if not alpha > 0:
            raise ValueError("alpha must be positive")
        self.alpha = alpha
        self.n_features = None

    def fit(self, X, y):
        X = check_X(X)
        y = check_binary_labels(y, len(X))
        require_both_classes(y)
        n_c = np.array([np.sum(y == 0), np.sum(y == 1)], dtype=float)
        ones = np.stack([X[y == 0].sum(axis=0), X[y == 1].sum(axis=0)])
        self.class_prior_ = n_c / n_c.sum()
        self.theta_ = (ones + self.alpha) / (n_c[:, None] + 2.0 * self.alpha)
        self.n_features = X.shape[1]
        return self

    def joint_log_likelihood(self, X):
        """log P(c) + sum_f log P(x_f | c), shape (n, 2)."""
        X = check_width(X, self.n_features)
        log_t, log_1mt = np.log(self.theta_), np.log1p(-self.theta_)
        return np.log(self.class_prior_)[None, :] + X @ log_t.T + (1.0 - X) @ log_1mt.T

    def predict_log_proba(self, X):
        jll = self.joint_log_likelihood(X)
        return jll - np.logaddexp(jll[:, 0], jll[:, 1])[:, None]

    def predict(self, X):
        jll = self.joint_log_likelihood(X)
        return (jll[:, 1] >= jll[:, 0]).astype(np.int64)

    def params(self):
        return {"n_features": self.n_features, "class_prior": self.class_prior_.tolist(),
                "theta": self.theta_.tolist()}

    @classmethod
    def from_params(cls, params, **spec):
        model = cls(**spec)
        model.n_features = params["n_features"]
        model.class_prior_ = np.asarray(params["class_prior"], dtype=float)
        model.theta_ = np.asarray(params["theta"], dtype=float)
        return model
