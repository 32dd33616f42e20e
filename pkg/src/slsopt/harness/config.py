"""Experiment configuration and its flat ``dotted.key = value`` text format.

Example::

    problem.name = matrix_factorization
    problem.seed = 0
    problem.k = 10
    algorithm = sgd_armijo
    linesearch.c = 0.1
    options.step_cap = 10.0
    run.batch_size = 100
    run.epochs = 50
    run.seeds = 0, 1, 2
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..linesearch import LineSearchConfig
from ..optimizers import ALGORITHMS, OptimizerOptions
from .. import problems as P


class ConfigError(ValueError):
    pass


# name -> (builder(params, seed), required keys)
def _diag(p, seed):
    return P.diag_quadratic(_as_list(p.get("L", [1.0])), int(p.get("dim", 1)))


def _lsq(p, seed):
    return P.gen_least_squares_interpolated(seed, int(p["n"]), int(p["d"]))


def _mf(p, seed):
    return P.gen_matrix_factorization(seed, int(p.get("m", 1000)), int(p.get("k", 10)))


def _kernel_synth(p, seed):
    data = P.make_separable_2d(seed, int(p.get("n_points", 500)), float(p.get("margin", 0.5)))
    oracle, _ = P.rbf_kernel_problem(data, float(p.get("bandwidth", 0.5)),
                                     float(p.get("train_fraction", 0.8)), seed)
    return oracle


def _libsvm(p, seed):
    path = Path(str(p["path"]))
    if not path.exists():
        raise ConfigError(f"LIBSVM file not found: {path}")
    oracle, _ = P.rbf_kernel_problem(P.read_libsvm(path), float(p["bandwidth"]),
                                     float(p.get("train_fraction", 0.8)), seed)
    return oracle


def _bilinear(p, seed):
    scale = p.get("solution_scale")
    return P.gen_bilinear_game(seed, int(p["d"]), int(p.get("n", p["d"])),
                               bool(p.get("interpolated", True)),
                               None if scale is None else float(scale))


def _monotone(p, seed):
    return P.gen_strongly_monotone_game(seed, int(p["d"]), int(p["n"]), float(p["mu"]))


PROBLEMS = {
    "diag_quadratic": (_diag, ()),
    "least_squares": (_lsq, ("n", "d")),
    "matrix_factorization": (_mf, ()),
    "kernel_synthetic": (_kernel_synth, ()),
    "libsvm": (_libsvm, ("path", "bandwidth")),
    "bilinear_game": (_bilinear, ("d",)),
    "monotone_game": (_monotone, ("d", "n", "mu")),
}


def build_problem(name: str, params: dict, seed: int):
    if name not in PROBLEMS:
        raise ConfigError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}")
    builder, required = PROBLEMS[name]
    missing = [k for k in required if k not in params]
    if missing:
        raise ConfigError(f"problem {name!r} needs parameters: {', '.join(missing)}")
    return builder(params, seed)


@dataclass
class ExperimentConfig:
    problem: str
    problem_params: dict = field(default_factory=dict)
    problem_seed: int = 0
    algorithm: str = "sgd_armijo"
    linesearch: LineSearchConfig = field(default_factory=LineSearchConfig)
    options: OptimizerOptions = field(default_factory=OptimizerOptions)
    batch_size: int = 1
    epochs: int = 1
    seeds: list[int] = field(default_factory=lambda: [0])
    output_dir: str = "out"

    def validate(self) -> "ExperimentConfig":
        if self.problem not in PROBLEMS:
            raise ConfigError(f"unknown problem {self.problem!r}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if not self.seeds:
            raise ConfigError("seed list is empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seed list has duplicates")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be positive")
        if self.epochs < 1:
            raise ConfigError("epochs must be positive")
        return self

    def iterations(self, n: int) -> int:
        return max(1, math.ceil(self.epochs * n / self.batch_size))

    def build_problem(self):
        return build_problem(self.problem, self.problem_params, self.problem_seed)

    # text format

    def to_text(self) -> str:
        lines = [f"problem.name = {self.problem}", f"problem.seed = {self.problem_seed}"]
        for key in sorted(self.problem_params):
            lines.append(f"problem.{key} = {_fmt(self.problem_params[key])}")
        lines.append(f"algorithm = {self.algorithm}")
        for prefix, obj in (("linesearch", self.linesearch), ("options", self.options)):
            for f in dataclasses.fields(obj):
                lines.append(f"{prefix}.{f.name} = {_fmt(getattr(obj, f.name))}")
        lines += [
            f"run.batch_size = {self.batch_size}",
            f"run.epochs = {self.epochs}",
            f"run.seeds = {_fmt(list(self.seeds))}",
            f"run.output_dir = {self.output_dir}",
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        return cls.from_mapping(parse_kv(text))

    @classmethod
    def from_mapping(cls, kv: dict[str, str]) -> "ExperimentConfig":
        kv = dict(kv)
        try:
            name = kv.pop("problem.name")
        except KeyError:
            raise ConfigError("missing key problem.name") from None
        cfg = {"problem": name, "problem_params": {}}
        ls_kw, opt_kw = {}, {}
        ls_types = {f.name: f.type for f in dataclasses.fields(LineSearchConfig)}
        opt_types = {f.name: f.type for f in dataclasses.fields(OptimizerOptions)}
        for key, raw in kv.items():
            head, _, tail = key.partition(".")
            if key == "problem.seed":
                cfg["problem_seed"] = _to_int(key, raw)
            elif head == "problem" and tail:
                cfg["problem_params"][tail] = _infer(raw)
            elif key == "algorithm":
                cfg["algorithm"] = raw
            elif head == "linesearch" and tail in ls_types:
                ls_kw[tail] = _typed(key, raw, ls_types[tail])
            elif head == "options" and tail in opt_types:
                opt_kw[tail] = _typed(key, raw, opt_types[tail])
            elif key == "run.batch_size":
                cfg["batch_size"] = _to_int(key, raw)
            elif key == "run.epochs":
                cfg["epochs"] = _to_int(key, raw)
            elif key == "run.seeds":
                cfg["seeds"] = [_to_int(key, s) for s in _split(raw)]
            elif key == "run.output_dir":
                cfg["output_dir"] = raw
            else:
                raise ConfigError(f"unknown key {key!r}")
        try:
            cfg["linesearch"] = LineSearchConfig(**ls_kw)
            cfg["options"] = OptimizerOptions(**opt_kw)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return cls(**cfg).validate()

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        return cls.from_text(path.read_text(encoding="utf-8"))

    def with_overrides(self, overrides: dict[str, str]) -> "ExperimentConfig":
        kv = parse_kv(self.to_text())
        kv.update(overrides)
        return ExperimentConfig.from_mapping(kv)


def parse_kv(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key = key.strip()
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ", ".join(_fmt(x) for x in v) + ("," if len(v) == 1 else "")
    return str(v)


def _split(raw: str) -> list[str]:
    return [s.strip() for s in raw.split(",") if s.strip()]


def _scalar(raw: str):
    low = raw.lower()
    if low == "none":
        return None
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw


def _infer(raw: str):
    if "," in raw:
        return [_scalar(s) for s in _split(raw)]
    return _scalar(raw)


def _as_list(v):
    return v if isinstance(v, list) else [v]


def _to_int(key, raw):
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def _typed(key, raw, typ):
    typ = str(typ)
    low = raw.lower()
    if "None" in typ and low == "none":
        return None
    if typ.startswith("bool"):
        if low not in ("true", "false"):
            raise ConfigError(f"{key}: expected true/false, got {raw!r}")
        return low == "true"
    if typ.startswith("int"):
        return _to_int(key, raw)
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
