"""Two-layer linear regression ``min E |W2 W1 x - A x|^2`` against an ill-conditioned A."""

from __future__ import annotations

import numpy as np
from scipy.stats import ortho_group

from ..core import FiniteSumOracle

IN_DIM = 6
OUT_DIM = 10


def log_spaced_spectrum(count: int = IN_DIM, decades_per_step: float = 2.0) -> np.ndarray:
    return 10.0 ** (-decades_per_step * np.arange(count))


class MatrixFactorization(FiniteSumOracle):
    """Per-sample loss ``f_j(w) = |W2 W1 x_j - A x_j|^2``.

    ``w`` packs ``W1`` (k x 6) row-major followed by ``W2`` (10 x k) row-major.
    """

    def __init__(self, A, X, rank: int):
        self.A = np.asarray(A, dtype=np.float64)
        self.X = np.asarray(X, dtype=np.float64)
        self.Y = self.X @ self.A.T
        self.out_dim, self.in_dim = self.A.shape
        self.rank = int(rank)
        self.n = self.X.shape[0]
        self.dim = self.rank * (self.in_dim + self.out_dim)

    def unpack(self, w):
        k, p, q = self.rank, self.in_dim, self.out_dim
        return w[: k * p].reshape(k, p), w[k * p:].reshape(q, k)

    def pack(self, W1, W2):
        return np.concatenate([np.ravel(W1), np.ravel(W2)])

    def _forward(self, w, indices):
        W1, W2 = self.unpack(w)
        idx = np.asarray(indices)
        X = self.X[idx]
        H = X @ W1.T
        R = H @ W2.T - self.Y[idx]
        return W1, W2, X, H, R

    def batch_value(self, w, indices):
        *_, R = self._forward(w, indices)
        return float(np.einsum("ij,ij->", R, R)) / R.shape[0]

    def batch_gradient(self, w, indices):
        return self.batch_value_and_gradient(w, indices)[1]

    def batch_value_and_gradient(self, w, indices):
        W1, W2, X, H, R = self._forward(w, indices)
        b = R.shape[0]
        gW2 = 2.0 * R.T @ H / b
        gW1 = 2.0 * (R @ W2).T @ X / b
        return float(np.einsum("ij,ij->", R, R)) / b, self.pack(gW1, gW2)

    def product(self, w):
        W1, W2 = self.unpack(w)
        return W2 @ W1

    def initial_point(self, rng):
        # i.i.d. N(0, 1/dim) over all factor entries; fan-in scaling leaves the
        # rank-1 model stranded near the origin saddle on some seeds
        return rng.standard_normal(self.dim) / np.sqrt(self.dim)

    def condition_number(self) -> float:
        s = np.linalg.svd(self.A, compute_uv=False)
        return float(s[0] / s[-1])

    def rank_floor(self, r: int | None = None) -> float:
        """Smallest training loss reachable by any product of rank <= r.

        The loss is ``|(B - A) S^(1/2)|_F^2`` with ``S`` the sample second
        moment, so the optimum is a truncated SVD of ``A S^(1/2)``.
        """
        r = self.rank if r is None else r
        S = self.X.T @ self.X / self.n
        evals, evecs = np.linalg.eigh(S)
        root = (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.T
        s = np.linalg.svd(self.A @ root, compute_uv=False)
        return float(np.sum(s[r:] ** 2))


def gen_matrix_factorization(seed: int, m: int = 1000, k: int = 10) -> MatrixFactorization:
    """A = U diag(s) V^T with log-spaced singular values 1, 1e-2, ..., 1e-10."""
    if not 1 <= k <= OUT_DIM:
        raise ValueError(f"rank must lie in [1, {OUT_DIM}], got {k}")
    if m < 1:
        raise ValueError(f"need at least one sample, got m={m}")
    rng = np.random.default_rng(seed)
    U = ortho_group.rvs(OUT_DIM, random_state=rng)[:, :IN_DIM]
    V = ortho_group.rvs(IN_DIM, random_state=rng)
    A = (U * log_spaced_spectrum()) @ V.T
    X = rng.standard_normal((m, IN_DIM))
    return MatrixFactorization(A, X, k)
