from .config import ConfigError, ExperimentConfig, build_problem
from .csvio import COLUMNS, read_trace_csv, write_trace_csv
from .experiment import ExperimentError, aggregate_seeds, expand_grid, run_experiment, run_sweep
from .theory import SgcEstimate, TheoreticalCurve, estimate_sgc_rho, theoretical_overlay

__all__ = [
    "COLUMNS",
    "ConfigError",
    "ExperimentConfig",
    "ExperimentError",
    "SgcEstimate",
    "TheoreticalCurve",
    "aggregate_seeds",
    "build_problem",
    "estimate_sgc_rho",
    "expand_grid",
    "read_trace_csv",
    "run_experiment",
    "run_sweep",
    "theoretical_overlay",
    "write_trace_csv",
]
