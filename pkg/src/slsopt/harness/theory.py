"""Theoretical rate curves for overlaying on traces, and a strong-growth estimate."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..core import RateBound, bilinear_factor, is_contraction

KINDS = ("strongly_convex", "convex", "rsi", "monotone", "bilinear")


@dataclass
class TheoreticalCurve:
    kind: str
    bound: RateBound
    values: np.ndarray  # bound after t = 1..T iterations
    factor: float | None = None
    valid: bool = True
    warning: str | None = None


def theoretical_overlay(kind: str, bound: RateBound, T: int, dist0_sq: float,
                        sigma_bounds: tuple[float, float] | None = None) -> TheoreticalCurve:
    """Bound values for iterations ``1..T``.

    ``strongly_convex``, ``rsi``/``monotone`` and ``bilinear`` are geometric
    (``factor**t * dist0_sq``); ``convex`` is ``C / t`` on the averaged iterate.
    A violated hypothesis still yields a curve, flagged ``valid=False``.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown rate kind {kind!r}; choose from {KINDS}")
    t = np.arange(1, T + 1, dtype=np.float64)
    if kind == "convex":
        try:
            C, warning = bound.convex_constant(dist0_sq), None
        except ValueError as exc:
            C, warning = math.inf, str(exc)
        curve = TheoreticalCurve(kind, bound, C / t, valid=warning is None, warning=warning)
    else:
        if kind == "strongly_convex":
            factor = bound.strongly_convex_factor()
        elif kind == "bilinear":
            if sigma_bounds is None:
                raise ValueError("bilinear overlay needs sigma_bounds")
            factor = bilinear_factor(*sigma_bounds, bound.eta_max)
        else:
            factor = bound.rsi_factor()
        valid = is_contraction(factor)
        curve = TheoreticalCurve(kind, bound, factor**t * dist0_sq, factor=factor, valid=valid)
        if not valid:
            curve.warning = f"contraction factor {factor} lies outside (0, 1)"
    if curve.warning:
        warnings.warn(curve.warning, RuntimeWarning, stacklevel=2)
    return curve


@dataclass
class SgcEstimate:
    rho: float
    points_used: int
    is_estimate: bool = True


def estimate_sgc_rho(oracle, points) -> SgcEstimate:
    """Lower estimate of the strong growth constant over the given points:
    ``max_w mean_i |grad f_i(w)|^2 / |grad f(w)|^2``.
    """
    best = -math.inf
    used = 0
    for w in points:
        w = np.asarray(w, dtype=np.float64)
        full = oracle.full_gradient(w)
        denom = float(full @ full)
        if denom == 0.0:
            continue
        comp = math.fsum(float(g @ g) for g in (oracle.batch_gradient(w, [i]) for i in range(oracle.n)))
        best = max(best, comp / oracle.n / denom)
        used += 1
    if used == 0:
        raise ValueError("every sample point has a zero full gradient; rho is undefined there")
    return SgcEstimate(best, used)
