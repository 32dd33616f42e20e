"""Line-search steppers, two baselines, and the :func:`run` driver.

Each stepper maps ``(state, oracle, sampler, linesearch, options)`` to a new
state and never mutates its input. ``state.k`` counts completed iterations, so
the iteration being taken is ``state.k + 1``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    CountingOracle,
    FiniteSumOracle,
    GradientOperator,
    MiniBatchSampler,
    RunTrace,
    SaddleOracle,
    TraceRow,
    as_params,
    epoch_of,
    squared_distance,
)
from .linesearch import (
    LineSearchConfig,
    LineSearchOutcome,
    backtrack_armijo,
    backtrack_lipschitz,
    goldstein_search,
    reset_step,
)

__all__ = [
    "ALGORITHMS",
    "DivergenceError",
    "OptimizerOptions",
    "SgdState",
    "SegState",
    "init_state",
    "sgd_armijo_step",
    "sgd_goldstein_step",
    "polyak_armijo_step",
    "nesterov_armijo_step",
    "seg_lipschitz_step",
    "constant_sgd_step",
    "adam_step",
    "run",
]


class DivergenceError(RuntimeError):
    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message if iteration is None else f"iteration {iteration}: {message}")
        self.iteration = iteration


@dataclass(frozen=True)
class OptimizerOptions:
    alpha: float = 0.0
    step_cap: float | None = None
    independent_batch: bool = False
    baseline_eta: float = 0.1
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")
        if self.step_cap is not None and not self.step_cap > 0.0:
            raise ValueError(f"step_cap must be positive, got {self.step_cap}")
        if not self.baseline_eta > 0.0:
            raise ValueError(f"baseline_eta must be positive, got {self.baseline_eta}")
        if not self.lr > 0.0:
            raise ValueError(f"lr must be positive, got {self.lr}")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValueError("Adam betas must lie in [0, 1)")
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


@dataclass
class SgdState:
    w: np.ndarray
    eta_prev: float
    k: int = 0
    w_prev: np.ndarray | None = None
    lam: float = 1.0
    lam_prev: float = 0.0
    tau: float = 1.0
    m: np.ndarray | None = None
    v: np.ndarray | None = None
    last: LineSearchOutcome | None = None


@dataclass
class SegState:
    z: np.ndarray
    eta_prev: float
    k: int = 0
    last: LineSearchOutcome | None = None

    @property
    def w(self):
        return self.z


def _capped(eta: float, opts: OptimizerOptions) -> float:
    if opts.step_cap is not None and eta > opts.step_cap:
        return opts.step_cap
    return eta


def _checked(w: np.ndarray, k: int) -> np.ndarray:
    if not np.all(np.isfinite(w)):
        raise DivergenceError("non-finite iterate", iteration=k)
    return w


def _armijo_step_size(state, oracle, sampler, ls, opts, check_sampler):
    """Sample i_k, compute its gradient, and pick eta by Armijo backtracking."""
    batch = sampler.sample()
    f_w, g = oracle.batch_value_and_gradient(state.w, batch)
    start = reset_step(state.eta_prev, ls, sampler.b, sampler.n, state.k + 1)
    if opts.independent_batch:
        if check_sampler is None:
            raise ValueError("independent_batch needs a second sampler")
        outcome = backtrack_armijo(oracle, check_sampler.sample(), state.w, start, ls)
    else:
        outcome = backtrack_armijo(oracle, batch, state.w, start, ls, value_and_grad=(f_w, g))
    return g, outcome, _capped(outcome.eta, opts)


def sgd_armijo_step(state: SgdState, oracle, sampler, ls: LineSearchConfig,
                    opts: OptimizerOptions | None = None, check_sampler=None) -> SgdState:
    opts = opts or OptimizerOptions()
    g, outcome, eta = _armijo_step_size(state, oracle, sampler, ls, opts, check_sampler)
    w = _checked(state.w - eta * g, state.k + 1)
    return replace(state, w=w, eta_prev=eta, k=state.k + 1, last=outcome)


def sgd_goldstein_step(state: SgdState, oracle, sampler, ls: LineSearchConfig,
                       opts: OptimizerOptions | None = None, check_sampler=None) -> SgdState:
    # eta is carried across iterations; there is no reset
    opts = opts or OptimizerOptions()
    batch = sampler.sample()
    f_w, g = oracle.batch_value_and_gradient(state.w, batch)
    outcome = goldstein_search(oracle, batch, state.w, state.eta_prev, ls, value_and_grad=(f_w, g))
    eta = _capped(outcome.eta, opts)
    w = _checked(state.w - eta * g, state.k + 1)
    return replace(state, w=w, eta_prev=eta, k=state.k + 1, last=outcome)


def polyak_armijo_step(state: SgdState, oracle, sampler, ls: LineSearchConfig,
                       opts: OptimizerOptions | None = None, check_sampler=None) -> SgdState:
    opts = opts or OptimizerOptions()
    g, outcome, eta = _armijo_step_size(state, oracle, sampler, ls, opts, check_sampler)
    w_prev = state.w if state.w_prev is None else state.w_prev
    w = _checked(state.w - eta * g + opts.alpha * (state.w - w_prev), state.k + 1)
    return replace(state, w=w, w_prev=state.w, eta_prev=eta, k=state.k + 1, last=outcome)


def nesterov_armijo_step(state: SgdState, oracle, sampler, ls: LineSearchConfig,
                         opts: OptimizerOptions | None = None, check_sampler=None) -> SgdState:
    opts = opts or OptimizerOptions()
    g, outcome, eta = _armijo_step_size(state, oracle, sampler, ls, opts, check_sampler)
    w_look = state.w - eta * g
    w = _checked((1.0 - state.tau) * w_look + state.tau * state.w, state.k + 1)
    # bookkeeping order matters: lam_prev takes the *old* lam
    temp = state.lam
    lam = (1.0 + math.sqrt(1.0 + 4.0 * state.lam_prev**2)) / 2.0
    lam_prev = temp
    tau = (1.0 - lam_prev) / lam
    return replace(state, w=w, eta_prev=eta, k=state.k + 1, lam=lam, lam_prev=lam_prev,
                   tau=tau, last=outcome)


def _operator_view(oracle):
    inner = getattr(oracle, "inner", oracle)
    if isinstance(inner, SaddleOracle) or (not isinstance(inner, FiniteSumOracle)
                                           and hasattr(oracle, "batch_operator")):
        return oracle
    return GradientOperator(oracle)


def seg_lipschitz_step(state: SegState, oracle, sampler, ls: LineSearchConfig,
                       opts: OptimizerOptions | None = None, check_sampler=None) -> SegState:
    """One extra-gradient step; the same batch and step serve both stages."""
    opts = opts or OptimizerOptions()
    op = _operator_view(oracle)
    batch = sampler.sample()
    Fz = op.batch_operator(state.z, batch)
    start = reset_step(state.eta_prev, ls, sampler.b, sampler.n, state.k + 1)
    outcome = backtrack_lipschitz(op, batch, state.z, start, ls, Fz=Fz)
    eta = _capped(outcome.eta, opts)
    if eta == outcome.eta:
        # the last line-search check already evaluated F at z - eta*Fz
        F_half = outcome.trial_value
    else:
        F_half = op.batch_operator(state.z - eta * Fz, batch)
    z = _checked(state.z - eta * F_half, state.k + 1)
    return replace(state, z=z, eta_prev=eta, k=state.k + 1, last=outcome)


def constant_sgd_step(state: SgdState, oracle, sampler, ls=None,
                      opts: OptimizerOptions | None = None, check_sampler=None) -> SgdState:
    opts = opts or OptimizerOptions()
    g = oracle.batch_gradient(state.w, sampler.sample())
    w = _checked(state.w - opts.baseline_eta * g, state.k + 1)
    return replace(state, w=w, eta_prev=opts.baseline_eta, k=state.k + 1)


def adam_step(state: SgdState, oracle, sampler, ls=None,
              opts: OptimizerOptions | None = None, check_sampler=None) -> SgdState:
    opts = opts or OptimizerOptions()
    g = oracle.batch_gradient(state.w, sampler.sample())
    t = state.k + 1
    m = state.m if state.m is not None else np.zeros_like(state.w)
    v = state.v if state.v is not None else np.zeros_like(state.w)
    m = opts.beta1 * m + (1.0 - opts.beta1) * g
    v = opts.beta2 * v + (1.0 - opts.beta2) * g * g
    m_hat = m / (1.0 - opts.beta1**t)
    v_hat = v / (1.0 - opts.beta2**t)
    w = _checked(state.w - opts.lr * m_hat / (np.sqrt(v_hat) + opts.epsilon), t)
    return replace(state, w=w, m=m, v=v, eta_prev=opts.lr, k=t)


ALGORITHMS = {
    "sgd_armijo": sgd_armijo_step,
    "sgd_goldstein": sgd_goldstein_step,
    "polyak_armijo": polyak_armijo_step,
    "nesterov_armijo": nesterov_armijo_step,
    "seg_lipschitz": seg_lipschitz_step,
    "sgd_constant": constant_sgd_step,
    "adam": adam_step,
}


def init_state(algorithm: str, w0, ls: LineSearchConfig, opts: OptimizerOptions | None = None):
    opts = opts or OptimizerOptions()
    w0 = as_params(w0)
    if algorithm == "seg_lipschitz":
        return SegState(z=w0, eta_prev=ls.eta_max)
    if algorithm == "sgd_constant":
        return SgdState(w=w0, eta_prev=opts.baseline_eta)
    if algorithm == "adam":
        return SgdState(w=w0, eta_prev=opts.lr)
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {sorted(ALGORITHMS)}")
    return SgdState(w=w0, eta_prev=ls.eta_max)


def run(algorithm: str, problem, *, batch_size: int, iterations: int, seed: int = 0,
        linesearch: LineSearchConfig | None = None, options: OptimizerOptions | None = None,
        w0=None, keep_params: bool = False) -> RunTrace:
    """Drive ``algorithm`` on ``problem`` for ``iterations`` steps.

    The seed is split into independent streams for batch sampling, the
    independent line-search batch, and the starting point, so the trace is a
    deterministic function of ``(problem, seed, configs)``. Full training loss
    (and the test metric, if any) is evaluated only at epoch boundaries and is
    not charged to the evaluation counters.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {sorted(ALGORITHMS)}")
    if iterations < 1:
        raise ValueError(f"iteration budget must be at least 1, got {iterations}")
    ls = linesearch or LineSearchConfig()
    opts = options or OptimizerOptions()
    stepper = ALGORITHMS[algorithm]
    n = problem.n

    s_batch, s_check, s_init = np.random.SeedSequence(seed).spawn(3)
    sampler = MiniBatchSampler(n, batch_size, s_batch)
    check_sampler = MiniBatchSampler(n, batch_size, s_check)
    if w0 is None:
        w0 = problem.initial_point(np.random.default_rng(s_init))
    w0 = as_params(w0, problem.dim)

    solution = problem.solution
    counted = CountingOracle(problem)
    trace = RunTrace(
        algorithm=algorithm, seed=seed, batch_size=batch_size, n=n, eta_max=ls.eta_max,
        initial_loss=problem.full_value(w0),
        initial_dist_sq=None if solution is None else squared_distance(w0, solution),
        params_history=[w0] if keep_params else None,
    )
    state = init_state(algorithm, w0, ls, opts)
    t0 = time.perf_counter()
    prev_epoch = 0
    for k in range(1, iterations + 1):
        try:
            state = stepper(state, counted, sampler, ls, opts, check_sampler)
        except DivergenceError as exc:
            raise DivergenceError(f"{algorithm} diverged: {exc}", iteration=k) from exc
        w = state.w
        epoch = epoch_of(k, batch_size, n)
        loss = metric = None
        if epoch != prev_epoch:
            loss = problem.full_value(w)
            metric = problem.test_metric(w)
            prev_epoch = epoch
        last = state.last
        trace.rows.append(TraceRow(
            iteration=k,
            epoch=epoch,
            step_size=state.eta_prev,
            fn_evals=counted.fn_evals,
            grad_evals=counted.grad_evals,
            train_loss=loss,
            test_metric=metric,
            dist_sq=None if solution is None else squared_distance(w, solution),
            wall_secs=time.perf_counter() - t0,
            condition_evals=0 if last is None else last.condition_evals,
            hit_floor=False if last is None else last.hit_floor,
        ))
        if keep_params:
            trace.params_history.append(w)
    trace.final_params = state.w
    return trace
