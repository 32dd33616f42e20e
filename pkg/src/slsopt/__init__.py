"""Stochastic line-search optimizers (Armijo, Goldstein, Lipschitz) for finite sums and games."""

from .core import (
    CountingOracle,
    FiniteSumOracle,
    GradientOperator,
    MiniBatchSampler,
    RateBound,
    RunTrace,
    SaddleOracle,
    TraceRow,
    epoch_of,
    sample_batch,
    squared_distance,
)
from .linesearch import (
    LineSearchConfig,
    LineSearchOutcome,
    armijo_holds,
    backtrack_armijo,
    backtrack_lipschitz,
    goldstein_search,
    lipschitz_holds,
    reset_step,
)
from .optimizers import ALGORITHMS, DivergenceError, OptimizerOptions, SegState, SgdState, run

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "CountingOracle",
    "DivergenceError",
    "FiniteSumOracle",
    "GradientOperator",
    "LineSearchConfig",
    "LineSearchOutcome",
    "MiniBatchSampler",
    "OptimizerOptions",
    "RateBound",
    "RunTrace",
    "SaddleOracle",
    "SegState",
    "SgdState",
    "TraceRow",
    "armijo_holds",
    "backtrack_armijo",
    "backtrack_lipschitz",
    "epoch_of",
    "goldstein_search",
    "lipschitz_holds",
    "reset_step",
    "run",
    "sample_batch",
    "squared_distance",
]
