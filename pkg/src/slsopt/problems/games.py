"""Finite-sum games ``F(z) = (1/n) sum_i F_i(z)`` on stacked iterates ``z``."""

from __future__ import annotations

import numpy as np

from ..core import SaddleOracle


class BilinearGame(SaddleOracle):
    """``F_i(x, y) = (A_i y - b_i, -(A_i^T x - c_i))`` with ``z = (x, y)``."""

    def __init__(self, A, b, c, solution=None):
        self.A = np.asarray(A, dtype=np.float64)
        self.b = np.asarray(b, dtype=np.float64)
        self.c = np.asarray(c, dtype=np.float64)
        self.n, self.d, d2 = self.A.shape
        if d2 != self.d:
            raise ValueError("component matrices must be square")
        self.dim = 2 * self.d
        self.solution = None if solution is None else np.asarray(solution, dtype=np.float64)
        mean_AAt = np.einsum("ikl,iml->km", self.A, self.A) / self.n
        per_comp = max(np.linalg.norm(Ai @ Ai.T, 2) for Ai in self.A)
        self.sigma_bounds = (float(np.linalg.eigvalsh(mean_AAt)[0]), float(per_comp))

    def batch_operator(self, z, indices):
        idx = np.asarray(indices)
        x, y = z[: self.d], z[self.d:]
        A = self.A[idx]
        gx = np.einsum("bkl,l->k", A, y) / idx.size - self.b[idx].mean(axis=0)
        gy = -(np.einsum("blk,l->k", A, x) / idx.size - self.c[idx].mean(axis=0))
        return np.concatenate([gx, gy])

    def averaged_solution(self) -> np.ndarray:
        """Stationary point of the averaged game (least-squares if singular)."""
        A = self.A.mean(axis=0)
        y = np.linalg.lstsq(A, self.b.mean(axis=0), rcond=None)[0]
        x = np.linalg.lstsq(A.T, self.c.mean(axis=0), rcond=None)[0]
        return np.concatenate([x, y])


def gen_bilinear_game(seed: int, d: int, n: int | None = None, interpolated: bool = True,
                      solution_scale: float | None = None) -> BilinearGame:
    """Coordinate game with ``[A_i]_{kl} = 1`` iff ``k = l = i``.

    Non-interpolated: ``b_i, c_i ~ N(0, I/d)``. Interpolated: draw ``(x*, y*)``
    with entries ``N(0, solution_scale^2)`` (default ``1/sqrt(d)``, the same
    scale as the non-interpolated offsets) and set ``b_i = A_i y*``,
    ``c_i = A_i^T x*``.
    """
    n = d if n is None else n
    if n != d:
        raise ValueError(f"the coordinate construction needs n == d, got n={n}, d={d}")
    rng = np.random.default_rng(seed)
    A = np.zeros((n, d, d))
    A[np.arange(n), np.arange(n), np.arange(n)] = 1.0
    if not interpolated:
        b = rng.normal(0.0, 1.0 / np.sqrt(d), size=(n, d))
        c = rng.normal(0.0, 1.0 / np.sqrt(d), size=(n, d))
        return BilinearGame(A, b, c)
    scale = 1.0 / np.sqrt(d) if solution_scale is None else solution_scale
    x_star = rng.normal(0.0, scale, size=d)
    y_star = rng.normal(0.0, scale, size=d)
    b = A @ y_star
    c = np.einsum("ilk,l->ik", A, x_star)
    return BilinearGame(A, b, c, solution=np.concatenate([x_star, y_star]))


class AffineGame(SaddleOracle):
    """``F_i(z) = M_i z - r_i``."""

    def __init__(self, M, r, solution=None, mu: float | None = None):
        self.M = np.asarray(M, dtype=np.float64)
        self.r = np.asarray(r, dtype=np.float64)
        self.n, self.dim, _ = self.M.shape
        self.solution = None if solution is None else np.asarray(solution, dtype=np.float64)
        self.mu = mu
        sym = 0.5 * (self.M + np.transpose(self.M, (0, 2, 1)))
        self.component_monotonicity = np.array([np.linalg.eigvalsh(s)[0] for s in sym])
        self.lipschitz_constants = np.array([np.linalg.norm(m, 2) for m in self.M])

    def batch_operator(self, z, indices):
        idx = np.asarray(indices)
        return np.einsum("bkl,l->k", self.M[idx], z) / idx.size - self.r[idx].mean(axis=0)

    def monotonicity_gap(self, u, v) -> float:
        """``<F(u) - F(v), u - v> - mu |u - v|^2`` for the averaged operator."""
        diff = u - v
        Fd = self.full_operator(u) - self.full_operator(v)
        return float(Fd @ diff - self.mu * (diff @ diff))


def gen_strongly_monotone_game(seed: int, d: int, n: int, mu: float,
                               checks: int = 50) -> AffineGame:
    """``M_i = mu I + S_i + B_i`` (S_i PSD, B_i skew) with ``r_i = M_i z*``."""
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, d, d)) / np.sqrt(d)
    S = np.einsum("ikl,iml->ikm", G, G) / 4.0
    H = rng.standard_normal((n, d, d)) / np.sqrt(d)
    B = 0.5 * (H - np.transpose(H, (0, 2, 1)))
    M = mu * np.eye(d) + S + B
    z_star = rng.standard_normal(d)
    game = AffineGame(M, M @ z_star, solution=z_star, mu=mu)
    for _ in range(checks):
        u, v = rng.standard_normal(d), rng.standard_normal(d)
        if game.monotonicity_gap(u, v) < -1e-9 * (1.0 + float((u - v) @ (u - v))):
            raise RuntimeError("generated operator failed the strong monotonicity check")
    return game
