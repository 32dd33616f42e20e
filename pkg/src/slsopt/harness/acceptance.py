"""Acceptance criteria as runnable checks.

Each ``criterion_*`` function returns a :class:`CriterionResult`; ``SUITES``
groups them for ``slsopt verify --suite NAME``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .. import problems as P
from ..core import MiniBatchSampler, RateBound
from ..linesearch import (
    LineSearchConfig,
    armijo_holds,
    backtrack_armijo,
    curvature_holds,
    goldstein_search,
)
from ..optimizers import OptimizerOptions, init_state, nesterov_armijo_step, run
from .theory import theoretical_overlay


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    metrics: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:>2} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _timed(number, name, budget: float | None = None):
    """Wrap a check returning ``(passed, detail, metrics)``; ``budget`` is a runtime limit in seconds."""
    def wrap(fn):
        def inner(*args, **kwargs):
            t0 = time.perf_counter()
            passed, detail, metrics = fn(*args, **kwargs)
            secs = time.perf_counter() - t0
            if budget is not None and secs >= budget:
                passed = False
                detail += f"; runtime {secs:.1f}s over budget {budget:g}s"
            return CriterionResult(number, name, bool(passed), detail, metrics, secs)
        inner.__name__ = fn.__name__
        inner.__doc__ = fn.__doc__
        inner.number = number
        return inner
    return wrap


# 1 ---------------------------------------------------------------------------

@_timed(1, "armijo step bounds on quadratics", budget=1.0)
def criterion_step_bounds(points: int = 250, seed: int = 0):
    """Accepted Armijo steps lie in [beta*min(2(1-c)/L, eta_max), min(1/(2cL), eta_max)/beta]."""
    rng = np.random.default_rng(seed)
    beta, eta_max = 0.9, 1.0
    cases = violations = 0
    worst = []
    for L in (0.5, 1.0, 4.0, 100.0):
        oracle = P.diag_quadratic([L], dim=3)
        for c in (0.1, 0.5):
            cfg = LineSearchConfig(c=c, beta=beta, eta_max=eta_max)
            lo = beta * min(2.0 * (1.0 - c) / L, eta_max)
            hi = min(1.0 / (2.0 * c * L), eta_max) / beta
            for _ in range(points):
                w = rng.standard_normal(3) * 10.0 ** rng.uniform(-3, 3)
                eta = backtrack_armijo(oracle, [0], w, eta_max, cfg).eta
                cases += 1
                if not lo <= eta <= hi:
                    violations += 1
                    worst.append((L, c, eta))
    return violations == 0, f"{cases} cases, {violations} violations", {"violations": worst[:5]}


# 2, 3, 9 ---------------------------------------------------------------------

MF_LS = LineSearchConfig(c=0.1, beta=0.9, gamma=2.0, eta_max=1.0, reset_option=2)
MF_OPTS = OptimizerOptions(step_cap=10.0)
_mf_cache: dict = {}


def mf_traces(rank: int, seeds, epochs: int = 50, batch_size: int = 100, m: int = 1000):
    """SGD + Armijo on the factorization benchmark; problem and run share the seed."""
    out = []
    for s in seeds:
        key = (rank, s, epochs, batch_size, m)
        if key not in _mf_cache:
            problem = P.gen_matrix_factorization(s, m=m, k=rank)
            trace = run("sgd_armijo", problem, batch_size=batch_size,
                        iterations=epochs * m // batch_size, seed=s,
                        linesearch=MF_LS, options=MF_OPTS)
            _mf_cache[key] = (problem, trace)
        out.append(_mf_cache[key])
    return out


@_timed(2, "rank-10 factorization reaches 1e-10")
def criterion_mf_interpolation(seeds=range(20), need: int = 18, tol: float = 1e-10):
    finals = [t.final_loss for _, t in mf_traces(10, seeds)]
    hits = sum(f < tol for f in finals)
    return (hits >= need, f"{hits}/{len(finals)} seeds below {tol:g} (median {np.median(finals):.2e})",
            {"final_losses": finals})


@_timed(3, "rank-1 factorization stalls at its floor")
def criterion_mf_floor(seeds=range(20)):
    ratios = []
    for problem, trace in mf_traces(1, seeds):
        ratios.append(trace.final_loss / problem.rank_floor(1))
    ok = all(0.5 <= r <= 10.0 for r in ratios)
    return ok, f"loss/floor in [{min(ratios):.3f}, {max(ratios):.3f}]", {"ratios": ratios}


@_timed(9, "armijo checks per iteration")
def criterion_eval_count(seeds=range(20), limit: float = 3.0):
    means, floors = [], 0
    for _, trace in mf_traces(10, seeds):
        rows = [r for r in trace.rows if r.epoch >= 1]
        means.append(math.fsum(r.condition_evals for r in rows) / len(rows))
        floors += trace.hit_floor_count
    worst = max(means)
    return (worst <= limit and floors == 0,
            f"max mean checks {worst:.3f} (limit {limit:g}), hit_floor {floors}",
            {"mean_checks": means})


# 4 ---------------------------------------------------------------------------

@_timed(4, "least-squares contraction factor", budget=30.0)
def criterion_contraction(runs: int = 200, first: int = 50, last: int = 500, slack: float = 0.02):
    problem = P.gen_least_squares_interpolated(0, 200, 20)
    ls = LineSearchConfig(c=0.5, reset_option=1)
    w0 = np.zeros(problem.dim)
    dist = np.zeros(last + 1)
    for s in range(runs):
        trace = run("sgd_armijo", problem, batch_size=1, iterations=last, seed=s,
                    linesearch=ls, w0=w0)
        dist[0] += trace.initial_dist_sq
        dist[1:] += np.array(trace.column("dist_sq"))
    dist /= runs
    observed = (dist[last] / dist[first]) ** (1.0 / (last - first))
    bound = RateBound(problem.strong_convexity, float(np.max(problem.lipschitz_constants)),
                      ls.eta_max, ls.c)
    factor = bound.strongly_convex_factor()
    return (observed <= factor + slack, f"observed {observed:.5f} vs bound {factor:.5f}+{slack}",
            {"observed": observed, "factor": factor})


# 5 ---------------------------------------------------------------------------

@_timed(5, "extra-gradient closed form on a 1-d bilinear game")
def criterion_seg_closed_form(iterations: int = 100, tol: float = 1e-12):
    game = P.BilinearGame(np.ones((1, 1, 1)), np.zeros((1, 1)), np.zeros((1, 1)),
                          solution=np.zeros(2))
    ls = LineSearchConfig(c=1.0 / math.sqrt(2.0), beta=0.9, eta_max=1.0, reset_option=1)
    z0 = np.array([1.0, 0.5])
    trace = run("seg_lipschitz", game, batch_size=1, iterations=iterations, seed=0,
                linesearch=ls, w0=z0, keep_params=True)
    steps = trace.column("step_size")
    eta = 0.6561
    z, err = z0.copy(), 0.0
    for got in trace.params_history[1:]:
        z = np.array([(1 - eta**2) * z[0] - eta * z[1], eta * z[0] + (1 - eta**2) * z[1]])
        err = max(err, float(np.max(np.abs(got - z))))
    # four multiplications by beta: exact up to one rounding per multiply
    steps_ok = all(abs(s - eta) <= 4 * math.ulp(eta) for s in steps)
    return (steps_ok and err <= tol,
            f"eta {steps[0]!r} on all steps: {steps_ok}; max deviation {err:.1e}",
            {"max_abs_err": err})


# 6 ---------------------------------------------------------------------------

GAME_LS = LineSearchConfig(c=1.0 / math.sqrt(2.0), beta=0.9, eta_max=1.0, reset_option=1)


@_timed(6, "stochastic bilinear game", budget=30.0)
def criterion_bilinear(seeds=range(5), d: int = 50, iterations: int = 4000, need: int = 4):
    finals, kept = [], []
    for s in seeds:
        game = P.gen_bilinear_game(s, d, d, interpolated=True)
        trace = run("seg_lipschitz", game, batch_size=1, iterations=iterations, seed=s,
                    linesearch=GAME_LS)
        finals.append(trace.rows[-1].dist_sq)
        noisy = P.gen_bilinear_game(s, d, d, interpolated=False)
        center = noisy.averaged_solution()
        z0 = np.zeros(noisy.dim)
        trace = run("seg_lipschitz", noisy, batch_size=1, iterations=iterations, seed=s,
                    linesearch=GAME_LS, w0=z0)
        d0 = float(np.sum((z0 - center) ** 2))
        kept.append(float(np.sum((trace.final_params - center) ** 2)) / d0)
    hits = sum(f < 1e-8 for f in finals)
    ok = hits >= need and all(k > 1e-2 for k in kept)
    return (ok, f"interpolated {hits}/{len(finals)} below 1e-8; "
                f"non-interpolated min ratio {min(kept):.3f}",
            {"interpolated": finals, "noisy_ratio": kept})


# 7 ---------------------------------------------------------------------------

@_timed(7, "extra-gradient on rank-10 factorization")
def criterion_rsi(seeds=range(20), epochs: int = 100, need: int = 18, tol: float = 1e-8):
    ls = LineSearchConfig(c=0.25, beta=0.9, gamma=2.0, eta_max=1.0, reset_option=2)
    finals = []
    for s in seeds:
        problem = P.gen_matrix_factorization(s, k=10)
        trace = run("seg_lipschitz", problem, batch_size=100,
                    iterations=epochs * problem.n // 100, seed=s, linesearch=ls,
                    options=MF_OPTS)
        finals.append(trace.final_loss)
    hits = sum(f < tol for f in finals)
    return (hits >= need, f"{hits}/{len(finals)} seeds below {tol:g} (median {np.median(finals):.2e})",
            {"final_losses": finals})


# 8 ---------------------------------------------------------------------------

@_timed(8, "strongly monotone game")
def criterion_monotone(seeds=range(5), iterations: int = 2000, tol: float = 1e-10,
                       resolution: float = 1e-25):
    finals, monotone = [], []
    for s in seeds:
        game = P.gen_strongly_monotone_game(s, 20, 50, 0.1)
        eta_max = min(1.0, 1.0 / (4.0 * float(np.max(game.component_monotonicity))))
        ls = LineSearchConfig(c=0.25, beta=0.9, eta_max=eta_max, reset_option=1)
        trace = run("seg_lipschitz", game, batch_size=1, iterations=iterations, seed=s,
                    linesearch=ls, w0=np.zeros(game.dim))
        dist = np.array(trace.column("dist_sq"))
        epochs = np.array(trace.column("epoch"))
        avg = [dist[epochs == e].mean() for e in np.unique(epochs) if e < epochs[-1]]
        # ignore epochs already at round-off level
        avg = [a for a in avg if a > resolution]
        monotone.append(all(b < a for a, b in zip(avg, avg[1:])))
        finals.append(float(dist[-1]))
    ok = all(monotone) and all(f < tol for f in finals)
    return (ok, f"monotone on {sum(monotone)}/{len(monotone)}; worst final {max(finals):.1e}",
            {"finals": finals})


# 10 --------------------------------------------------------------------------

@_timed(10, "kernel logistic regression on separable data")
def criterion_kernel(seeds=range(5), epochs: int = 35, batch_size: int = 100,
                     reference_epochs: int = 2000):
    losses, accs, overlay_ok = [], [], []
    for s in seeds:
        data = P.make_separable_2d(s, 500, 0.5)
        oracle, _ = P.rbf_kernel_problem(data, 0.5, 0.8, s)
        iters = math.ceil(epochs * oracle.n / batch_size)
        trace = run("sgd_armijo", oracle, batch_size=batch_size, iterations=iters, seed=s,
                    linesearch=LineSearchConfig(c=0.1))
        losses.append(trace.final_loss)
        accs.append(oracle.test_metric(trace.final_params))

        # averaged-iterate bound needs 1/2 < c < 1
        ls = LineSearchConfig(c=2.0 / 3.0)
        w0 = np.zeros(oracle.dim)
        ref = run("sgd_armijo", oracle, batch_size=batch_size,
                  iterations=reference_epochs * oracle.n // batch_size, seed=s,
                  linesearch=ls, w0=w0)
        w_ref = ref.final_params
        f_ref = oracle.full_value(w_ref)
        comp = run("sgd_armijo", oracle, batch_size=batch_size, iterations=iters, seed=s,
                   linesearch=ls, w0=w0, keep_params=True)
        f_ref = min(f_ref, *(r.train_loss for r in comp.rows if r.train_loss is not None))
        bound = RateBound(0.0, float(np.max(oracle.lipschitz_constants)), ls.eta_max, ls.c)
        curve = theoretical_overlay("convex", bound, iters, float(np.sum((w0 - w_ref) ** 2)))
        history = np.array(comp.params_history)
        running = np.cumsum(history[:-1], axis=0)
        ok = True
        for r in comp.rows:
            if r.train_loss is None:
                continue
            T = r.iteration
            gap = oracle.full_value(running[T - 1] / T) - f_ref
            ok &= gap <= curve.values[T - 1]
        overlay_ok.append(bool(ok))
    passed = all(l < 1e-2 for l in losses) and all(a == 1.0 for a in accs) and all(overlay_ok)
    return (passed, f"max loss {max(losses):.2e}, min accuracy {min(accs):.3f}, "
                    f"overlay holds on {sum(overlay_ok)}/{len(overlay_ok)}",
            {"losses": losses, "accuracy": accs})


# 11 --------------------------------------------------------------------------

def _random_libsvm(rng) -> P.LibsvmData:
    n = int(rng.integers(1, 12))
    n_features = int(rng.integers(1, 15))
    labels = rng.choice([-1.0, 1.0], size=n)
    rows = []
    for _ in range(n):
        k = int(rng.integers(0, n_features + 1))
        idx = np.sort(rng.choice(np.arange(1, n_features + 1), size=k, replace=False))
        rows.append({int(i): float(rng.standard_normal() * 10.0 ** rng.integers(-5, 5)) for i in idx})
    return P.LibsvmData(labels, rows, n_features)


def fd_gradient_error(oracle, w, indices, h: float = 1e-6) -> float:
    g = oracle.batch_gradient(w, indices)
    fd = np.empty_like(w)
    for j in range(w.size):
        e = np.zeros_like(w)
        e[j] = h
        fd[j] = (oracle.batch_value(w + e, indices) - oracle.batch_value(w - e, indices)) / (2 * h)
    return float(np.linalg.norm(fd - g) / max(np.linalg.norm(g), 1e-300))


def structural_checks(seed: int = 0) -> dict[str, tuple[bool, str]]:
    rng = np.random.default_rng(seed)
    out = {}
    lsq = P.gen_least_squares_interpolated(seed, 100, 10)

    a = run("polyak_armijo", lsq, batch_size=5, iterations=1000, seed=seed,
            options=OptimizerOptions(alpha=0.0), keep_params=True)
    b = run("sgd_armijo", lsq, batch_size=5, iterations=1000, seed=seed, keep_params=True)
    same = (all(np.array_equal(x, y) for x, y in zip(a.params_history, b.params_history))
            and a.column("step_size") == b.column("step_size"))
    out["polyak alpha=0 matches sgd"] = (same, "bit-identical" if same else "differs")

    state = init_state("nesterov_armijo", np.ones(1), LineSearchConfig())
    quad = P.diag_quadratic([1.0])
    sampler = MiniBatchSampler(1, 1, 0)
    taus = []
    for _ in range(3):
        state = nesterov_armijo_step(state, quad, sampler, LineSearchConfig())
        taus.append(state.tau)
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    expect = [0.0, 0.0, (1.0 - phi) / phi]
    tau_ok = all(abs(t - e) <= 1e-9 for t, e in zip(taus, expect))
    out["nesterov tau sequence"] = (tau_ok, ", ".join(f"{t:.10f}" for t in taus))

    cfg = LineSearchConfig(c=0.25, eta_max=10.0)
    bad = checked = 0
    for _ in range(300):
        w = rng.standard_normal(lsq.dim) * 3.0
        batch = rng.integers(0, lsq.n, size=5)
        eta_in = 10.0 ** rng.uniform(-4, 1)
        res = goldstein_search(lsq, batch, w, eta_in, cfg)
        if res.hit_floor or res.capped:
            continue
        f_w, g = lsq.batch_value_and_gradient(w, batch)
        f_t = lsq.batch_value(w - res.eta * g, batch)
        checked += 1
        if not (armijo_holds(lsq, batch, w, g, f_w, res.eta, cfg.c)
                and curvature_holds(f_t, f_w, float(g @ g), res.eta, cfg.c)):
            bad += 1
    out["goldstein window"] = (bad == 0 and checked > 0, f"{checked} accepted steps, {bad} violations")

    t = run("sgd_armijo", lsq, batch_size=5, iterations=500, seed=seed,
            linesearch=LineSearchConfig(reset_option=0))
    steps = t.column("step_size")
    mono = all(y <= x for x, y in zip(steps, steps[1:]))
    out["reset option 0 non-increasing"] = (mono, f"{len(steps)} steps")

    fails = 0
    for _ in range(100):
        data = _random_libsvm(rng)
        back = P.parse_libsvm(P.format_libsvm(data))
        if not (np.array_equal(back.labels, data.labels) and back.rows == data.rows):
            fails += 1
    out["libsvm round trip"] = (fails == 0, f"100 fixtures, {fails} mismatches")

    worst = 0.0
    data = P.make_separable_2d(seed, 60, 0.3)
    kern, _ = P.rbf_kernel_problem(data, 0.5, 0.8, seed)
    mf = P.gen_matrix_factorization(seed, m=50, k=3)
    for oracle in (P.diag_quadratic([0.5, 2.0, 3.0], dim=4), lsq, mf, kern):
        w = rng.standard_normal(oracle.dim) * 0.5
        batch = rng.integers(0, oracle.n, size=min(10, oracle.n))
        worst = max(worst, fd_gradient_error(oracle, w, batch))
    out["finite-difference gradients"] = (worst <= 1e-5, f"worst relative error {worst:.1e}")
    return out


@_timed(11, "structural properties")
def criterion_structural(seed: int = 0):
    checks = structural_checks(seed)
    failed = [k for k, (ok, _) in checks.items() if not ok]
    detail = "all sub-checks pass" if not failed else "failed: " + ", ".join(failed)
    return not failed, detail, {k: v[1] for k, v in checks.items()}


CRITERIA = {
    1: criterion_step_bounds,
    2: criterion_mf_interpolation,
    3: criterion_mf_floor,
    4: criterion_contraction,
    5: criterion_seg_closed_form,
    6: criterion_bilinear,
    7: criterion_rsi,
    8: criterion_monotone,
    9: criterion_eval_count,
    10: criterion_kernel,
    11: criterion_structural,
}

SUITES = {
    "lemma1": [1],  # step-size bound checks; name fixed by the CLI interface
    "factorization": [2, 3, 9],
    "contraction": [4],
    "games": [5, 6, 8],
    "rsi": [7],
    "kernel": [10],
    "structural": [11],
    "quick": [1, 5, 11],
    "all": sorted(CRITERIA),
}


def run_suite(name: str, report=print) -> list[CriterionResult]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    results = []
    for number in SUITES[name]:
        res = CRITERIA[number]()
        if report is not None:
            report(res.line())
            if number == 11:
                for key, detail in res.metrics.items():
                    report(f"       {key}: {detail}")
        results.append(res)
    return results
