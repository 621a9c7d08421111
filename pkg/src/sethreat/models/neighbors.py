import numpy as np

from ._common import check_X, check_binary_labels, check_width, require_both_classes, vote


def _sq_distances(A, B):
    # direct differences, so exact ties stay exact
    out = np.empty((len(A), len(B)))
    for start in range(0, len(A), 256):
        diff = A[start:start + 256, None, :] - B[None, :, :]
        out[start:start + 256] = np.einsum("ijk,ijk->ij", diff, diff)
    return out


class KNN:
    """k-nearest-neighbour majority vote under Euclidean distance.

    Equal distances are ordered by stored row index; a split vote goes to
    class 1.
    """

    family = "knn"

    def __init__(self, k=5):
        if k < 1:
            raise ValueError("k must be at least 1")
        self.k = k
        self.n_features = None

    def fit(self, X, y):
        X = check_X(X)
        y = check_binary_labels(y, len(X))
        if self.k > len(X):
            raise ValueError(f"k={self.k} exceeds the {len(X)} stored rows")
        self.X_, self.y_ = X, y
        self.n_features = X.shape[1]
        return self

    def neighbors(self, X):
        X = check_width(X, self.n_features)
        # stable sort keeps index order on distance ties
        d = _sq_distances(X, self.X_)
        return np.argsort(d, axis=1, kind="stable")[:, : self.k]

    def predict(self, X):
        pos = self.y_[self.neighbors(X)].sum(axis=1)
        return vote(pos, self.k - pos)

    def params(self):
        return {"n_features": self.n_features, "X": self.X_.tolist(), "y": self.y_.tolist()}

    @classmethod
    def from_params(cls, params, **spec):
        model = cls(**spec)
        model.n_features = params["n_features"]
        model.X_ = np.asarray(params["X"], dtype=float).reshape(-1, model.n_features)
        model.y_ = np.asarray(params["y"], dtype=np.int64)
        return model


class NearestCentroid:
    """Assigns the class whose training mean is closest; equidistant goes to 1."""

    family = "nearest_centroid"

    def __init__(self):
        self.n_features = None

    def fit(self, X, y):
        X = check_X(X)
        y = check_binary_labels(y, len(X))
        require_both_classes(y)
        self.centroids_ = np.stack([X[y == 0].mean(axis=0), X[y == 1].mean(axis=0)])
        self.n_features = X.shape[1]
        return self

    def predict(self, X):
        X = check_width(X, self.n_features)
        d = _sq_distances(X, self.centroids_)
        return (d[:, 1] <= d[:, 0]).astype(np.int64)

    def params(self):
        return {"n_features": self.n_features, "centroids": self.centroids_.tolist()}

    @classmethod
    def from_params(cls, params, **spec):
        model = cls(**spec)
        model.n_features = params["n_features"]
        model.centroids_ = np.asarray(params["centroids"], dtype=float)
        return model
