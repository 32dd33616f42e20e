"""Shared types: problem oracles, mini-batch sampling, run traces and rate constants.

Parameter vectors are plain 1-D ``float64`` numpy arrays. Games stack ``(x, y)``
into a single vector ``z``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FiniteSumOracle",
    "SaddleOracle",
    "GradientOperator",
    "CountingOracle",
    "MiniBatchSampler",
    "sample_batch",
    "squared_distance",
    "epoch_of",
    "TraceRow",
    "RunTrace",
    "RateBound",
    "as_params",
]


def as_params(w, dim: int | None = None) -> np.ndarray:
    """Validate and copy ``w`` into a finite 1-D float64 array."""
    arr = np.array(w, dtype=np.float64).reshape(-1)
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"expected a parameter vector of length {dim}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("parameter vector contains non-finite entries")
    return arr


class FiniteSumOracle:
    """Base class for ``f(w) = (1/n) sum_i f_i(w)``.

    Subclasses implement :meth:`batch_value` and :meth:`batch_gradient`; the
    batch methods return means over the (possibly repeated) indices. Optional
    known constants are exposed as attributes and left ``None`` when unknown.
    """

    n: int
    dim: int
    lipschitz_constants: np.ndarray | None = None
    strong_convexity: float | None = None
    solution: np.ndarray | None = None

    def batch_value(self, w: np.ndarray, indices) -> float:
        raise NotImplementedError

    def batch_gradient(self, w: np.ndarray, indices) -> np.ndarray:
        raise NotImplementedError

    def batch_value_and_gradient(self, w: np.ndarray, indices) -> tuple[float, np.ndarray]:
        # one forward+backward pass; subclasses override when it is cheaper fused
        return self.batch_value(w, indices), self.batch_gradient(w, indices)

    def all_indices(self) -> np.ndarray:
        return np.arange(self.n)

    def full_value(self, w: np.ndarray) -> float:
        return self.batch_value(w, self.all_indices())

    def full_gradient(self, w: np.ndarray) -> np.ndarray:
        return self.batch_gradient(w, self.all_indices())

    def initial_point(self, rng: np.random.Generator) -> np.ndarray:
        return np.zeros(self.dim)

    def test_metric(self, w: np.ndarray) -> float | None:
        """Held-out metric (e.g. accuracy); ``None`` when the problem has none."""
        return None


class SaddleOracle:
    """Base class for finite-sum operators ``F(z) = (1/n) sum_i F_i(z)``."""

    n: int
    dim: int
    solution: np.ndarray | None = None
    sigma_bounds: tuple[float, float] | None = None

    def batch_operator(self, z: np.ndarray, indices) -> np.ndarray:
        raise NotImplementedError

    def all_indices(self) -> np.ndarray:
        return np.arange(self.n)

    def full_operator(self, z: np.ndarray) -> np.ndarray:
        return self.batch_operator(z, self.all_indices())

    def full_value(self, z: np.ndarray) -> float:
        # squared residual of the averaged operator; used as the "loss" column for games
        F = self.full_operator(z)
        return float(F @ F)

    def initial_point(self, rng: np.random.Generator) -> np.ndarray:
        return np.zeros(self.dim)

    def test_metric(self, z: np.ndarray) -> float | None:
        return None


class GradientOperator(SaddleOracle):
    """View a minimization oracle as the operator ``F_i = grad f_i``."""

    def __init__(self, oracle: FiniteSumOracle):
        self.oracle = oracle
        self.n = oracle.n
        self.dim = oracle.dim
        self.solution = oracle.solution

    def batch_operator(self, z, indices):
        return self.oracle.batch_gradient(z, indices)

    def full_value(self, z):
        return self.oracle.full_value(z)

    def initial_point(self, rng):
        return self.oracle.initial_point(rng)

    def test_metric(self, z):
        return self.oracle.test_metric(z)


class CountingOracle:
    """Proxy that counts oracle calls.

    ``batch_value`` counts as a function evaluation. ``batch_gradient``,
    ``batch_value_and_gradient`` and ``batch_operator`` each count as one
    gradient evaluation (a fused forward/backward pass).
    """

    def __init__(self, inner):
        self.inner = inner
        self.fn_evals = 0
        self.grad_evals = 0

    def __getattr__(self, name):
        return getattr(self.inner, name)

    def batch_value(self, w, indices):
        self.fn_evals += 1
        return self.inner.batch_value(w, indices)

    def batch_gradient(self, w, indices):
        self.grad_evals += 1
        return self.inner.batch_gradient(w, indices)

    def batch_value_and_gradient(self, w, indices):
        self.grad_evals += 1
        return self.inner.batch_value_and_gradient(w, indices)

    def batch_operator(self, z, indices):
        self.grad_evals += 1
        return self.inner.batch_operator(z, indices)


class MiniBatchSampler:
    """Uniform sampling with replacement over ``{0, ..., n-1}``.

    ``seed`` may be an integer or a :class:`numpy.random.SeedSequence` (so a run
    can spawn independent streams).
    """

    def __init__(self, n: int, b: int, seed: int | np.random.SeedSequence = 0):
        if n < 1:
            raise ValueError(f"population size must be positive, got {n}")
        if not 1 <= b <= n:
            raise ValueError(f"batch size must lie in [1, {n}], got {b}")
        self.n = int(n)
        self.b = int(b)
        self.rng_seed = seed
        self._rng = np.random.Generator(np.random.PCG64(seed))

    def sample(self) -> np.ndarray:
        return self._rng.integers(0, self.n, size=self.b)


def sample_batch(sampler: MiniBatchSampler) -> np.ndarray:
    return sampler.sample()


def squared_distance(w, v) -> float:
    w = np.asarray(w, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if w.shape != v.shape:
        raise ValueError(f"dimension mismatch: {w.shape} vs {v.shape}")
    d = w - v
    return float(d @ d)


def epoch_of(iteration: int, b: int, n: int) -> int:
    return (iteration * b) // n


@dataclass
class TraceRow:
    iteration: int
    epoch: int
    step_size: float
    fn_evals: int
    grad_evals: int
    train_loss: float | None = None
    test_metric: float | None = None
    dist_sq: float | None = None
    wall_secs: float = 0.0
    condition_evals: int = 0
    hit_floor: bool = False


@dataclass
class RunTrace:
    """Per-iteration log of one optimization run."""

    algorithm: str
    seed: int
    batch_size: int
    n: int
    eta_max: float
    initial_loss: float
    initial_dist_sq: float | None = None
    rows: list[TraceRow] = field(default_factory=list)
    final_params: np.ndarray | None = None
    params_history: list[np.ndarray] | None = None

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.rows]

    @property
    def has_solution(self) -> bool:
        return self.initial_dist_sq is not None

    def epoch_losses(self) -> list[tuple[int, float]]:
        return [(r.epoch, r.train_loss) for r in self.rows if r.train_loss is not None]

    @property
    def final_loss(self) -> float:
        losses = self.epoch_losses()
        return losses[-1][1] if losses else self.initial_loss

    @property
    def hit_floor_count(self) -> int:
        return sum(r.hit_floor for r in self.rows)


@dataclass
class RateBound:
    """Constants entering the linear / sublinear rate bounds.

    ``mu_bar`` is the average strong-convexity (or RSI / strong-monotonicity)
    constant, ``L_max`` the largest component smoothness constant. ``L`` (the
    smoothness of the average) and ``rho`` (strong growth constant) are only
    needed for the non-convex bound.
    """

    mu_bar: float
    L_max: float
    eta_max: float
    c: float
    rho: float | None = None
    L: float | None = None
    rho_is_estimate: bool = False

    def strongly_convex_factor(self) -> float:
        return max(1.0 - self.mu_bar / self.L_max, 1.0 - self.mu_bar * self.eta_max)

    def rsi_factor(self) -> float:
        return max(1.0 - self.mu_bar / (4.0 * self.L_max), 1.0 - self.eta_max * self.mu_bar)

    def convex_constant(self, dist0_sq: float) -> float:
        c = self.c
        if not 0.5 < c < 1.0:
            raise ValueError(f"the O(1/T) bound needs 1/2 < c < 1, got c={c}")
        return c * max(self.L_max / (2.0 * (1.0 - c)), 1.0 / self.eta_max) / (2.0 * c - 1.0) * dist0_sq

    def nonconvex_delta(self) -> float:
        if self.rho is None or self.L is None:
            raise ValueError("delta needs both rho and L")
        a = 2.0 * (1.0 - self.c) / self.L_max
        return (self.eta_max + a) - self.rho * (self.eta_max - a + self.L * self.eta_max**2)


def bilinear_factor(sigma_min: float, sigma_max: float, eta_max: float) -> float:
    """Per-iteration contraction for interpolated bilinear games with c = 1/sqrt(2)."""
    return max(1.0 - sigma_min / (4.0 * sigma_max), 1.0 - 0.5 * eta_max * sigma_min)


def is_contraction(factor: float) -> bool:
    return math.isfinite(factor) and 0.0 < factor < 1.0
