import numpy as np


class WidthMismatch(ValueError):
    pass


def check_X(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D feature matrix, got shape {X.shape}")
    if X.shape[0] == 0:
        raise ValueError("cannot train on an empty matrix")
    return X


def check_binary_labels(y, n: int) -> np.ndarray:
    y = np.asarray(y).astype(np.int64).ravel()
    if y.shape != (n,):
        raise ValueError(f"expected {n} labels, got {y.shape[0]}")
    if np.any((y != 0) & (y != 1)):
        raise ValueError("labels must be 0 or 1")
    return y


def require_both_classes(y) -> None:
    if np.all(y == y[0]):
        raise ValueError(f"training set contains only class {int(y[0])}; both classes are required")


def check_width(X, width: int | None) -> np.ndarray:
    """Coerce a row or matrix to 2-D and verify its column count."""
    if width is None:
        raise RuntimeError("model is not trained")
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != width:
        raise WidthMismatch(f"model expects width {width}, got {X.shape[-1]}")
    return X


def vote(pos, neg):
    """Majority between two tallies; ties go to class 1."""
    return (np.asarray(pos) >= np.asarray(neg)).astype(np.int64)
