"""Unregularized binary logistic regression in the span of an RBF Gram matrix.

``K(x, x') = exp(-|x - x'|^2 / (2 sigma^2))`` and the model's margin on
example i is ``y_i * K[i] @ w``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.special import expit
from scipy.spatial.distance import cdist, pdist, squareform

from ..core import FiniteSumOracle
from .libsvm import LibsvmData


def _sq_dists(A, B=None) -> np.ndarray:
    if sparse.issparse(A):
        B = A if B is None else B
        na = np.asarray(A.multiply(A).sum(axis=1)).ravel()
        nb = np.asarray(B.multiply(B).sum(axis=1)).ravel()
        D = na[:, None] + nb[None, :] - 2.0 * np.asarray((A @ B.T).todense())
        return np.clip(D, 0.0, None)
    if B is None:
        return squareform(pdist(A, "sqeuclidean"))
    return cdist(A, B, "sqeuclidean")


def rbf_gram(X, bandwidth: float) -> np.ndarray:
    """Symmetric (bit-exact) Gram matrix with unit diagonal."""
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    K = np.exp(-_sq_dists(X) / (2.0 * bandwidth**2))
    upper = np.triu(K, 1)
    K = upper + upper.T
    np.fill_diagonal(K, 1.0)
    return K


def rbf_cross(X_new, X_train, bandwidth: float) -> np.ndarray:
    return np.exp(-_sq_dists(X_new, X_train) / (2.0 * bandwidth**2))


@dataclass
class KernelTestSet:
    K: np.ndarray  # n_test x n_train
    labels: np.ndarray

    def accuracy(self, w) -> float:
        if self.labels.size == 0:
            return float("nan")
        pred = np.where(self.K @ w >= 0.0, 1.0, -1.0)
        return float(np.mean(pred == self.labels))


class KernelLogistic(FiniteSumOracle):
    def __init__(self, K, labels, test_set: KernelTestSet | None = None):
        self.K = np.asarray(K, dtype=np.float64)
        self.labels = np.asarray(labels, dtype=np.float64)
        self.n = self.dim = self.K.shape[0]
        self.test_set = test_set
        # Hessian of f_i is s(1-s) K_i K_i^T with s(1-s) <= 1/4
        self.lipschitz_constants = np.einsum("ij,ij->i", self.K, self.K) / 4.0

    def _margins(self, w, idx):
        return self.labels[idx] * (self.K[idx] @ w)

    def batch_value(self, w, indices):
        idx = np.asarray(indices)
        return float(np.mean(np.logaddexp(0.0, -self._margins(w, idx))))

    def batch_gradient(self, w, indices):
        return self.batch_value_and_gradient(w, indices)[1]

    def batch_value_and_gradient(self, w, indices):
        idx = np.asarray(indices)
        m = self._margins(w, idx)
        s = expit(-m)
        grad = -(self.K[idx].T @ (self.labels[idx] * s)) / idx.size
        return float(np.mean(np.logaddexp(0.0, -m))), grad

    def test_metric(self, w):
        return None if self.test_set is None else self.test_set.accuracy(w)


def _as_arrays(dataset):
    if isinstance(dataset, LibsvmData):
        X = dataset.to_csr() if dataset.n_features > 1000 else dataset.to_dense()
        return X, dataset.labels
    X, y = dataset
    return X, np.asarray(y, dtype=np.float64)


def rbf_kernel_problem(dataset, bandwidth: float, train_fraction: float = 0.8, seed: int = 0):
    """Seeded shuffle, train/test cut, Gram matrix on the training split.

    ``dataset`` is a :class:`LibsvmData` or an ``(X, y)`` pair with labels in
    {-1, +1}. Returns ``(oracle, test_set)``; the oracle also reports test
    accuracy through :meth:`KernelLogistic.test_metric`.
    """
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    if not 0.0 < train_fraction <= 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1], got {train_fraction}")
    X, y = _as_arrays(dataset)
    n = X.shape[0]
    perm = np.random.default_rng(seed).permutation(n)
    n_train = int(round(train_fraction * n))
    tr, te = perm[:n_train], perm[n_train:]
    y_tr = y[tr]
    if n_train < 2 or not (np.any(y_tr > 0) and np.any(y_tr < 0)):
        raise ValueError("training split needs at least two examples and both labels")
    X_tr, X_te = X[tr], X[te]
    K = rbf_gram(X_tr, bandwidth)
    K_te = rbf_cross(X_te, X_tr, bandwidth) if te.size else np.zeros((0, n_train))
    test = KernelTestSet(K_te, y[te])
    return KernelLogistic(K, y_tr, test), test


def make_separable_2d(seed: int, n: int = 500, margin: float = 0.5, box: float = 2.0):
    """Uniform points in ``[-box, box]^2`` at distance >= margin from a random line
    through the origin, labelled by side."""
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 2.0 * np.pi)
    normal = np.array([np.cos(theta), np.sin(theta)])
    pts: list[np.ndarray] = []
    while sum(len(p) for p in pts) < n:
        cand = rng.uniform(-box, box, size=(2 * n, 2))
        pts.append(cand[np.abs(cand @ normal) >= margin])
    X = np.concatenate(pts)[:n]
    y = np.where(X @ normal > 0.0, 1.0, -1.0)
    return X, y
