from __future__ import annotations

import numpy as np

from ..core import FiniteSumOracle


class DiagQuadratic(FiniteSumOracle):
    """``f_i(w) = (L_i / 2) |w|^2``, minimized at the origin by every component."""

    def __init__(self, L, dim: int = 1):
        L = np.asarray(L, dtype=np.float64).reshape(-1)
        if L.size == 0 or np.any(L <= 0) or not np.all(np.isfinite(L)):
            raise ValueError("all curvatures L_i must be positive and finite")
        self.L = L
        self.n = L.size
        self.dim = int(dim)
        self.lipschitz_constants = L.copy()
        self.component_strong_convexity = L.copy()
        self.strong_convexity = float(L.mean())
        self.solution = np.zeros(self.dim)

    def _scale(self, indices) -> float:
        return float(self.L[np.asarray(indices)].mean())

    def batch_value(self, w, indices):
        return 0.5 * self._scale(indices) * float(w @ w)

    def batch_gradient(self, w, indices):
        return self._scale(indices) * w

    def batch_value_and_gradient(self, w, indices):
        s = self._scale(indices)
        return 0.5 * s * float(w @ w), s * w

    def initial_point(self, rng):
        return np.ones(self.dim)


def diag_quadratic(L, dim: int = 1) -> DiagQuadratic:
    return DiagQuadratic(L, dim)
