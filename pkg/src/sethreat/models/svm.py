"""Soft-margin kernel SVM trained with sequential minimal optimization."""

from __future__ import annotations

import math

import numpy as np

from ._common import check_X, check_binary_labels, check_width, require_both_classes

KERNELS = ("linear", "polynomial", "gaussian")


def kernel_eval(kind: str, x, z, a: float = 1.0, c: float = 1.0, degree: int = 3,
                sigma: float = 1.0) -> float:
    """Evaluate one kernel on a pair of vectors.

    linear: x.z; polynomial: (a x.z + c)^degree; gaussian: exp(-|x-z|^2 / (2 sigma^2)).
    """
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != z.shape:
        raise ValueError(f"kernel arguments differ in width: {x.shape} vs {z.shape}")
    return float(gram(kind, x[None, :], z[None, :], a=a, c=c, degree=degree, sigma=sigma)[0, 0])


def gram(kind, A, B, a=1.0, c=1.0, degree=3, sigma=1.0) -> np.ndarray:
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"kernel arguments differ in width: {A.shape[1]} vs {B.shape[1]}")
    if kind == "linear":
        return A @ B.T
    if kind == "polynomial":
        return (a * (A @ B.T) + c) ** degree
    if kind == "gaussian":
        if not sigma > 0:
            raise ValueError("gaussian kernel needs sigma > 0")
        sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * (A @ B.T)
        return np.exp(-np.maximum(sq, 0.0) / (2.0 * sigma * sigma))
    raise ValueError(f"unknown kernel {kind!r}; expected one of {KERNELS}")


class SVM:
    """Binary SVM solving the dual by Platt's SMO.

    Parameters
    ----------
    kernel : {"linear", "polynomial", "gaussian"}
    C : float
        Box constraint on every dual variable.
    sigma : float or None
        Gaussian width. ``None`` picks sigma with 1 / (2 sigma^2) = 1 / d.
    tol : float
        KKT violation tolerance.
    max_passes : int
        Maximum number of full sweeps over the training set.
    seed : int
        Seeds the start offsets of the fallback scans over candidate pairs.
    """

    family = "svm"
    MAX_FREE_SWEEPS = 100

    def __init__(self, kernel="gaussian", C=1.0, sigma=None, a=1.0, c=1.0, degree=3,
                 tol=1e-3, max_passes=20, seed=0):
        if kernel not in KERNELS:
            raise ValueError(f"unknown kernel {kernel!r}; expected one of {KERNELS}")
        if C <= 0:
            raise ValueError("C must be positive")
        self.kernel = kernel
        self.C = float(C)
        self.sigma = sigma
        self.a, self.c, self.degree = a, c, degree
        self.tol = tol
        self.max_passes = max_passes
        self.seed = seed
        self.n_features = None

    def _kernel_args(self):
        return dict(a=self.a, c=self.c, degree=self.degree, sigma=self.sigma_)

    def fit(self, X, y):
        X = check_X(X)
        y = check_binary_labels(y, len(X))
        require_both_classes(y)
        n, d = X.shape
        self.n_features = d
        self.sigma_ = float(self.sigma) if self.sigma is not None else math.sqrt(d / 2.0)
        t = np.where(y == 1, 1.0, -1.0)
        K = gram(self.kernel, X, X, **self._kernel_args())
        alpha, b = self._smo(K, t)
        self.dual_ = alpha
        self.b_ = b
        sv = alpha > 0
        self.support_ = np.flatnonzero(sv)
        self.support_vectors_ = X[sv]
        self.dual_coef_ = alpha[sv] * t[sv]
        return self

    def _smo(self, K, t):
        n = len(t)
        C, tol = self.C, self.tol
        rng = np.random.default_rng(self.seed)
        alpha = np.zeros(n)
        b = 0.0
        f = np.zeros(n)  # decision values on the training set

        def take_step(i1, i2):
            nonlocal b
            if i1 == i2:
                return False
            a1, a2 = alpha[i1], alpha[i2]
            y1, y2 = t[i1], t[i2]
            E1, E2 = f[i1] - y1, f[i2] - y2
            s = y1 * y2
            if y1 != y2:
                L, H = max(0.0, a2 - a1), min(C, C + a2 - a1)
            else:
                L, H = max(0.0, a1 + a2 - C), min(C, a1 + a2)
            if H - L < 1e-12:
                return False
            k11, k12, k22 = K[i1, i1], K[i1, i2], K[i2, i2]
            eta = k11 + k22 - 2.0 * k12
            if eta > 1e-12:
                a2n = min(max(a2 + y2 * (E1 - E2) / eta, L), H)
            else:
                # objective along the constraint line at both ends; E - b strips the bias
                f1 = y1 * (E1 - b) - a1 * k11 - s * a2 * k12
                f2 = y2 * (E2 - b) - s * a1 * k12 - a2 * k22
                L1 = a1 + s * (a2 - L)
                H1 = a1 + s * (a2 - H)
                obj_l = L1 * f1 + L * f2 + 0.5 * L1 * L1 * k11 + 0.5 * L * L * k22 + s * L * L1 * k12
                obj_h = H1 * f1 + H * f2 + 0.5 * H1 * H1 * k11 + 0.5 * H * H * k22 + s * H * H1 * k12
                if obj_l < obj_h - 1e-12:
                    a2n = L
                elif obj_l > obj_h + 1e-12:
                    a2n = H
                else:
                    a2n = a2
            if abs(a2n - a2) < 1e-10 * (a2n + a2 + 1e-10):
                return False
            a1n = a1 + s * (a2 - a2n)
            a1n = min(max(a1n, 0.0), C)
            d1, d2 = y1 * (a1n - a1), y2 * (a2n - a2)
            b1 = b - E1 - d1 * k11 - d2 * k12
            b2 = b - E2 - d1 * k12 - d2 * k22
            if 0.0 < a1n < C:
                bn = b1
            elif 0.0 < a2n < C:
                bn = b2
            else:
                bn = 0.5 * (b1 + b2)
            f[:] += d1 * K[i1] + d2 * K[i2] + (bn - b)
            b = bn
            alpha[i1], alpha[i2] = a1n, a2n
            return True

        def examine(i2):
            y2, a2 = t[i2], alpha[i2]
            E2 = f[i2] - y2
            r2 = E2 * y2
            if not ((r2 < -tol and a2 < C) or (r2 > tol and a2 > 0)):
                return False
            free = np.flatnonzero((alpha > 0) & (alpha < C))
            if free.size > 1:
                E = f[free] - t[free]
                i1 = int(free[np.argmax(np.abs(E - E2))])
                if take_step(i1, i2):
                    return True
            if free.size:
                start = int(rng.integers(free.size))
                for i1 in np.roll(free, -start):
                    if take_step(int(i1), i2):
                        return True
            start = int(rng.integers(n))
            for i1 in np.roll(np.arange(n), -start):
                if take_step(int(i1), i2):
                    return True
            return False

        passes = inner = 0
        changed, examine_all = 0, True
        while changed > 0 or examine_all:
            if examine_all:
                if passes >= self.max_passes:
                    break
                passes += 1
                inner = 0
                changed = sum(examine(i) for i in range(n))
                examine_all = False
            else:
                free = np.flatnonzero((alpha > 0) & (alpha < C))
                changed = sum(examine(int(i)) for i in free)
                inner += 1
                # a stalled free-set loop falls back to a full sweep
                if changed == 0 or inner >= self.MAX_FREE_SWEEPS:
                    examine_all = True
        self.n_passes_ = passes
        return alpha, b

    def decision_function(self, X):
        X = check_width(X, self.n_features)
        if self.support_vectors_.shape[0] == 0:
            return np.full(len(X), self.b_)
        Kx = gram(self.kernel, X, self.support_vectors_, **self._kernel_args())
        return Kx @ self.dual_coef_ + self.b_

    def predict(self, X):
        return (self.decision_function(X) >= 0).astype(np.int64)

    def params(self):
        return {
            "n_features": self.n_features,
            "sigma": self.sigma_,
            "bias": self.b_,
            "support": self.support_.tolist(),
            "support_vectors": self.support_vectors_.tolist(),
            "dual_coef": self.dual_coef_.tolist(),
        }

    @classmethod
    def from_params(cls, params, **spec):
        model = cls(**spec)
        model.n_features = params["n_features"]
        model.sigma_ = params["sigma"]
        model.b_ = params["bias"]
        model.support_ = np.asarray(params["support"], dtype=np.int64)
        model.support_vectors_ = np.asarray(params["support_vectors"], dtype=float).reshape(
            -1, model.n_features)
        model.dual_coef_ = np.asarray(params["dual_coef"], dtype=float)
        return model
