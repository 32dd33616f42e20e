"""Stochastic line-searches on a single mini-batch.

All conditions accept on equality. A non-finite trial value is treated as a
failed check, which forces further backtracking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LineSearchConfig",
    "LineSearchOutcome",
    "armijo_holds",
    "curvature_holds",
    "backtrack_armijo",
    "reset_step",
    "goldstein_search",
    "lipschitz_holds",
    "backtrack_lipschitz",
]


@dataclass(frozen=True)
class LineSearchConfig:
    c: float = 0.1
    beta: float = 0.9
    gamma: float = 2.0
    eta_max: float = 1.0
    reset_option: int = 2
    max_backtracks: int = 100

    def __post_init__(self):
        if not 0.0 < self.c < 1.0:
            raise ValueError(f"c must lie in (0, 1), got {self.c}")
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if not (self.eta_max > 0.0 and math.isfinite(self.eta_max)):
            raise ValueError(f"eta_max must be positive and finite, got {self.eta_max}")
        if self.reset_option not in (0, 1, 2):
            raise ValueError(f"reset_option must be 0, 1 or 2, got {self.reset_option}")
        if self.max_backtracks < 1:
            raise ValueError(f"max_backtracks must be positive, got {self.max_backtracks}")


@dataclass
class LineSearchOutcome:
    eta: float
    condition_evals: int
    hit_floor: bool = False
    # Goldstein only: curvature still failed at eta_max, so no further growth was possible
    capped: bool = False
    # operator value at the accepted trial point (Lipschitz search), reusable by SEG
    trial_value: np.ndarray | None = None


def _finite(x) -> bool:
    return bool(np.all(np.isfinite(x)))


def armijo_holds(oracle, batch, w, g, f_w, eta, c, g_sq=None) -> bool:
    """Sufficient decrease ``f_B(w - eta g) <= f_B(w) - c eta |g|^2`` (one value call)."""
    trial = oracle.batch_value(w - eta * g, batch)
    if not math.isfinite(trial):
        return False
    if g_sq is None:
        g_sq = float(g @ g)
    return trial <= f_w - c * eta * g_sq


def curvature_holds(f_trial, f_w, g_sq, eta, c) -> bool:
    return f_trial >= f_w - (1.0 - c) * eta * g_sq


def backtrack_armijo(oracle, batch, w, start_eta, config: LineSearchConfig,
                     value_and_grad=None) -> LineSearchOutcome:
    """Try ``start_eta, beta*start_eta, ...`` until the Armijo condition holds.

    The gradient is fixed at ``w``; only function values are re-evaluated. Pass
    ``value_and_grad=(f_w, g)`` when the caller already has them.
    """
    if not start_eta > 0.0:
        raise ValueError(f"start_eta must be positive, got {start_eta}")
    if value_and_grad is None:
        value_and_grad = oracle.batch_value_and_gradient(w, batch)
    f_w, g = value_and_grad
    g_sq = float(g @ g)
    eta = float(start_eta)
    for evals in range(1, config.max_backtracks + 1):
        if armijo_holds(oracle, batch, w, g, f_w, eta, config.c, g_sq):
            return LineSearchOutcome(eta, evals)
        if evals < config.max_backtracks:
            eta *= config.beta
    return LineSearchOutcome(eta, config.max_backtracks, hit_floor=True)


def reset_step(eta_prev: float, config: LineSearchConfig, b: int, n: int, k: int) -> float:
    """Starting step for iteration ``k`` (1-based), clamped to ``(0, eta_max]``."""
    if k == 1:
        return config.eta_max
    if config.reset_option == 0:
        eta = eta_prev
    elif config.reset_option == 1:
        eta = config.eta_max
    else:
        eta = eta_prev * config.gamma ** (b / n)
    return min(eta, config.eta_max)


def goldstein_search(oracle, batch, w, eta_in, config: LineSearchConfig,
                     value_and_grad=None) -> LineSearchOutcome:
    """Shrink on Armijo failure, grow (up to ``eta_max``) on curvature failure.

    Every check costs one function evaluation. If the curvature check fails
    while ``eta`` already equals ``eta_max``, growth is impossible and the step
    is returned with ``capped`` set.
    """
    if config.c > 0.5:
        raise ValueError(f"Goldstein search needs c <= 0.5, got {config.c}")
    if value_and_grad is None:
        value_and_grad = oracle.batch_value_and_gradient(w, batch)
    f_w, g = value_and_grad
    g_sq = float(g @ g)
    c = config.c
    eta = min(float(eta_in), config.eta_max)
    for evals in range(1, config.max_backtracks + 1):
        trial = oracle.batch_value(w - eta * g, batch)
        if not math.isfinite(trial) or trial > f_w - c * eta * g_sq:
            eta *= config.beta
        elif not curvature_holds(trial, f_w, g_sq, eta, c):
            if eta >= config.eta_max:
                return LineSearchOutcome(eta, evals, capped=True)
            eta = min(config.gamma * eta, config.eta_max)
        else:
            return LineSearchOutcome(eta, evals)
    return LineSearchOutcome(eta, config.max_backtracks, hit_floor=True)


def lipschitz_holds(operator, batch, z, Fz, eta, c, _out=None) -> bool:
    """``|F_B(z - eta Fz) - Fz| <= c |Fz|`` (one operator call)."""
    trial = operator.batch_operator(z - eta * Fz, batch)
    if _out is not None:
        _out.append(trial)
    if not _finite(trial):
        return False
    return float(np.linalg.norm(trial - Fz)) <= c * float(np.linalg.norm(Fz))


def backtrack_lipschitz(operator, batch, z, start_eta, config: LineSearchConfig,
                        Fz=None) -> LineSearchOutcome:
    """Backtracking on the Lipschitz condition; each check is one operator call.

    ``operator`` exposes ``batch_operator``; wrap a minimization oracle with
    :class:`slsopt.core.GradientOperator`.
    """
    if not start_eta > 0.0:
        raise ValueError(f"start_eta must be positive, got {start_eta}")
    if Fz is None:
        Fz = operator.batch_operator(z, batch)
    eta = float(start_eta)
    seen: list[np.ndarray] = []
    for evals in range(1, config.max_backtracks + 1):
        if lipschitz_holds(operator, batch, z, Fz, eta, config.c, _out=seen):
            return LineSearchOutcome(eta, evals, trial_value=seen[-1])
        if evals < config.max_backtracks:
            eta *= config.beta
    return LineSearchOutcome(eta, config.max_backtracks, hit_floor=True, trial_value=seen[-1])
