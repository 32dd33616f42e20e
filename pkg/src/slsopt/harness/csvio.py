from __future__ import annotations

import csv
from pathlib import Path

from ..core import RunTrace

COLUMNS = [
    "run_seed", "iter", "epoch", "train_loss", "test_metric", "step_size",
    "fn_evals", "grad_evals", "dist_sq", "wall_secs",
]
INT_COLUMNS = {"run_seed", "iter", "epoch", "fn_evals", "grad_evals"}


def fmt_float(x) -> str:
    # 17 significant digits: round-trips every double
    return "" if x is None else f"{float(x):.16e}"


def trace_rows(trace: RunTrace, run_seed: int | None = None, wall_clock: bool = True):
    seed = trace.seed if run_seed is None else run_seed
    for r in trace.rows:
        yield [
            str(seed), str(r.iteration), str(r.epoch),
            fmt_float(r.train_loss), fmt_float(r.test_metric), fmt_float(r.step_size),
            str(r.fn_evals), str(r.grad_evals), fmt_float(r.dist_sq),
            fmt_float(r.wall_secs) if wall_clock else "",
        ]


def write_trace_csv(trace: RunTrace, path, run_seed: int | None = None, wall_clock: bool = True):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COLUMNS)
        writer.writerows(trace_rows(trace, run_seed, wall_clock))


def _parse(col: str, cell: str):
    if cell == "":
        return None
    return int(cell) if col in INT_COLUMNS else float(cell)


def read_trace_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != COLUMNS:
            raise ValueError(f"{path}: unexpected header {header}")
        return [{c: _parse(c, v) for c, v in zip(COLUMNS, row)} for row in reader]


def write_rows(path, header: list[str], rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path
