from __future__ import annotations

import numpy as np

from ..core import FiniteSumOracle


class LeastSquares(FiniteSumOracle):
    """Per-row squared residuals ``f_i(w) = 0.5 (x_i^T w - y_i)^2``."""

    def __init__(self, X, y, solution=None):
        self.X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        self.y = np.asarray(y, dtype=np.float64).reshape(-1)
        self.n, self.dim = self.X.shape
        if self.y.shape[0] != self.n:
            raise ValueError("X and y disagree on the number of rows")
        self.lipschitz_constants = np.einsum("ij,ij->i", self.X, self.X)
        self.strong_convexity = float(np.linalg.eigvalsh(self.X.T @ self.X / self.n)[0])
        self.solution = None if solution is None else np.asarray(solution, dtype=np.float64)

    def _residual(self, w, indices):
        idx = np.asarray(indices)
        return self.X.take(idx, axis=0) @ w - self.y.take(idx), idx

    def batch_value(self, w, indices):
        # hot path of every line search: skip the index normalisation
        r = self.X.take(indices, axis=0) @ w - self.y.take(indices)
        return 0.5 * float(r @ r) / r.size

    def batch_gradient(self, w, indices):
        r, idx = self._residual(w, indices)
        return self.X[idx].T @ r / r.size

    def batch_value_and_gradient(self, w, indices):
        r, idx = self._residual(w, indices)
        return 0.5 * float(r @ r) / r.size, self.X[idx].T @ r / r.size


def gen_least_squares_interpolated(seed: int, n: int, d: int) -> LeastSquares:
    """Gaussian design with noiseless labels ``y = X w*``, so every f_i vanishes at w*."""
    if n < d:
        raise ValueError(f"need n >= d for a strongly convex objective, got n={n}, d={d}")
    rng = np.random.default_rng(seed)
    while True:
        X = rng.standard_normal((n, d))
        if np.linalg.matrix_rank(X) == d:
            break
    w_star = rng.standard_normal(d)
    return LeastSquares(X, X @ w_star, solution=w_star)
