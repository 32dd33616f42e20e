from __future__ import annotations

import itertools
import logging
import math
import platform
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import __version__
from ..optimizers import DivergenceError, run
from .config import ConfigError, ExperimentConfig
from .csvio import fmt_float, read_trace_csv, write_rows, write_trace_csv

log = logging.getLogger(__name__)

FORMAT_VERSION = 1


class ExperimentError(RuntimeError):
    def __init__(self, seed: int, iteration: int | None, cause: Exception):
        where = f"seed {seed}" + ("" if iteration is None else f", iteration {iteration}")
        super().__init__(f"{where}: {cause}")
        self.seed = seed
        self.iteration = iteration


@dataclass
class ExperimentResult:
    csv_paths: list[Path]
    metadata_path: Path


def metadata_text(config: ExperimentConfig) -> str:
    head = [
        f"format = {FORMAT_VERSION}",
        f"version = {__version__}",
        f"platform = {platform.platform()} python-{platform.python_version()} numpy-{np.__version__}",
    ]
    return "\n".join(head) + "\n" + config.to_text()


def run_experiment(config: ExperimentConfig, wall_clock: bool = True) -> ExperimentResult:
    """Run every seed of ``config`` and write ``seed_<s>.csv`` plus ``metadata.txt``.

    Files written by this call are removed again if any seed fails.
    """
    config.validate()
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    problem = config.build_problem()
    iterations = config.iterations(problem.n)
    if config.batch_size > problem.n:
        raise ConfigError(f"batch_size {config.batch_size} exceeds problem size {problem.n}")
    written: list[Path] = []
    try:
        for seed in config.seeds:
            log.info("running %s on %s, seed %d, %d iterations",
                     config.algorithm, config.problem, seed, iterations)
            try:
                trace = run(config.algorithm, problem, batch_size=config.batch_size,
                            iterations=iterations, seed=seed, linesearch=config.linesearch,
                            options=config.options)
            except DivergenceError as exc:
                raise ExperimentError(seed, exc.iteration, exc) from exc
            path = out / f"seed_{seed}.csv"
            written.append(path)
            write_trace_csv(trace, path, wall_clock=wall_clock)
        meta = out / "metadata.txt"
        written.append(meta)
        meta.write_text(metadata_text(config), encoding="utf-8")
    except BaseException:
        for p in written:
            p.unlink(missing_ok=True)
        raise
    return ExperimentResult(written[:-1], meta)


AGG_STATS = ("train_loss", "step_size", "dist_sq")
AGG_HEADER = ["iter", "epoch", "runs"] + [f"{c}_{s}" for c in AGG_STATS for s in ("mean", "std")]


def aggregate_seeds(paths) -> list[list]:
    """Per-iteration mean and sample std (n-1) across runs with identical grids."""
    paths = list(paths)
    if not paths:
        raise ValueError("no input files to aggregate")
    tables = [read_trace_csv(p) for p in paths]
    grid = [(r["iter"], r["epoch"]) for r in tables[0]]
    for p, t in zip(paths[1:], tables[1:]):
        if [(r["iter"], r["epoch"]) for r in t] != grid:
            raise ValueError(f"{p}: iteration grid differs from {paths[0]}")
    out = []
    for i, (it, ep) in enumerate(grid):
        row = [it, ep, len(tables)]
        for col in AGG_STATS:
            vals = [t[i][col] for t in tables if t[i][col] is not None]
            if not vals:
                row += [None, None]
            else:
                std = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
                row += [float(np.mean(vals)), std]
        out.append(row)
    return out


def write_aggregate(paths, dest) -> Path:
    rows = aggregate_seeds(paths)
    cells = ([str(v) if isinstance(v, int) else fmt_float(v) for v in r] for r in rows)
    return write_rows(dest, AGG_HEADER, cells)


def _sort_key(v):
    return (0, float(v), "") if isinstance(v, (int, float)) and not isinstance(v, bool) else (1, 0.0, str(v))


def expand_grid(grid: dict[str, list]) -> list[dict[str, object]]:
    """Cartesian product, ordered by parameter name then value."""
    names = sorted(grid)
    values = [sorted(grid[k], key=_sort_key) for k in names]
    return [dict(zip(names, combo)) for combo in itertools.product(*values)]


def run_sweep(base: ExperimentConfig, grid: dict[str, list], wall_clock: bool = True):
    results = []
    for combo in expand_grid(grid):
        tag = "__".join(f"{k}={v}" for k, v in combo.items())
        overrides = {k: str(v) for k, v in combo.items()}
        overrides["run.output_dir"] = str(Path(base.output_dir) / tag)
        cfg = base.with_overrides(overrides)
        results.append((combo, run_experiment(cfg, wall_clock=wall_clock)))
    return results


def mean_checks_after(trace, epoch: int = 1) -> float:
    rows = [r for r in trace.rows if r.epoch >= epoch]
    return math.fsum(r.condition_evals for r in rows) / max(len(rows), 1)
