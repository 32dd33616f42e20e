import math

import numpy as np
import pytest

from slsopt import problems as P
from slsopt.core import CountingOracle, MiniBatchSampler
from slsopt.linesearch import LineSearchConfig, armijo_holds
from slsopt.optimizers import (
    ALGORITHMS,
    DivergenceError,
    OptimizerOptions,
    SegState,
    SgdState,
    adam_step,
    constant_sgd_step,
    init_state,
    nesterov_armijo_step,
    polyak_armijo_step,
    run,
    seg_lipschitz_step,
    sgd_armijo_step,
    sgd_goldstein_step,
)

QUAD1 = P.diag_quadratic([1.0])
ONE = MiniBatchSampler(1, 1, 0)
PHI = (1 + math.sqrt(5)) / 2


class Shifted:
    """f_i(w) = 0.5 (w - 1)^2 for every component."""

    n = 2
    dim = 1

    def batch_value(self, w, idx):
        return 0.5 * float((w[0] - 1.0) ** 2)

    def batch_value_and_gradient(self, w, idx):
        return self.batch_value(w, idx), w - 1.0

    def batch_gradient(self, w, idx):
        return w - 1.0


class Bilinear1d:
    n = 1

    def batch_operator(self, z, idx):
        return np.array([z[1], -z[0]])


def state(w, eta=1.0, **kw):
    return SgdState(w=np.array(w, dtype=float), eta_prev=eta, **kw)


def test_sgd_armijo_one_step_to_minimizer():
    s = sgd_armijo_step(state([1.0]), QUAD1, ONE, LineSearchConfig(c=0.5))
    assert s.eta_prev == 1.0 and s.w[0] == 0.0 and s.k == 1


def test_sgd_armijo_zero_gradient_keeps_w():
    s = sgd_armijo_step(state([0.0]), QUAD1, ONE, LineSearchConfig(c=0.5))
    assert s.w[0] == 0.0 and s.eta_prev == 1.0


def test_sgd_armijo_shifted_quadratic():
    s = sgd_armijo_step(state([3.0]), Shifted(), MiniBatchSampler(2, 1, 0), LineSearchConfig(c=0.5))
    assert s.eta_prev == 1.0 and s.w[0] == 1.0


def test_goldstein_step_examples():
    ls = LineSearchConfig(c=0.1, gamma=1.5, eta_max=10.0)
    s = sgd_goldstein_step(state([1.0], eta=1.0), QUAD1, ONE, ls)
    assert s.eta_prev == 1.0 and s.w[0] == 0.0
    s = sgd_goldstein_step(state([1.0], eta=0.05), QUAD1, ONE, ls)
    assert s.eta_prev == pytest.approx(0.253125)
    assert s.w[0] == pytest.approx(1 - 0.253125)
    s = sgd_goldstein_step(state([0.0], eta=0.3), QUAD1, ONE, ls)
    assert s.w[0] == 0.0


def test_goldstein_carries_step_without_reset():
    ls = LineSearchConfig(c=0.1, gamma=1.5, eta_max=10.0)
    s = state([1.0], eta=0.3)
    s = sgd_goldstein_step(s, QUAD1, ONE, ls)
    # 0.3 sits inside the acceptance window [0.2, 1.8]
    assert s.eta_prev == 0.3


def test_polyak_momentum_substitution():
    class LinearUnit:
        n = 1

        def batch_value_and_gradient(self, w, idx):
            return float(w[0]), np.ones(1)

        def batch_value(self, w, idx):
            return float(w[0])

    s = state([1.0], w_prev=np.zeros(1), k=3)
    s = polyak_armijo_step(s, LinearUnit(), ONE, LineSearchConfig(reset_option=1),
                           OptimizerOptions(alpha=0.5))
    assert s.eta_prev == 1.0
    assert s.w[0] == pytest.approx(0.5)


def test_polyak_first_step_equals_armijo_step():
    lsq = P.gen_least_squares_interpolated(0, 30, 3)
    ls = LineSearchConfig()
    w0 = np.ones(3)
    a = polyak_armijo_step(init_state("polyak_armijo", w0, ls), lsq, MiniBatchSampler(30, 5, 1), ls,
                           OptimizerOptions(alpha=0.9))
    b = sgd_armijo_step(init_state("sgd_armijo", w0, ls), lsq, MiniBatchSampler(30, 5, 1), ls)
    np.testing.assert_array_equal(a.w, b.w)


def test_polyak_alpha_zero_is_bit_identical():
    lsq = P.gen_least_squares_interpolated(3, 50, 5)
    a = run("polyak_armijo", lsq, batch_size=4, iterations=300, seed=9, keep_params=True)
    b = run("sgd_armijo", lsq, batch_size=4, iterations=300, seed=9, keep_params=True)
    for x, y in zip(a.params_history, b.params_history):
        np.testing.assert_array_equal(x, y)


def test_nesterov_bookkeeping():
    ls = LineSearchConfig()
    s = init_state("nesterov_armijo", np.ones(1), ls)
    assert (s.lam, s.lam_prev, s.tau) == (1.0, 0.0, 1.0)
    expected = [(1.0, 1.0, 0.0), (PHI, 1.0, 0.0), (PHI, PHI, (1 - PHI) / PHI)]
    for lam, lam_prev, tau in expected:
        s = nesterov_armijo_step(s, QUAD1, ONE, ls)
        assert s.lam == pytest.approx(lam, abs=1e-12)
        assert s.lam_prev == pytest.approx(lam_prev, abs=1e-12)
        assert s.tau == pytest.approx(tau, abs=1e-9)
    assert s.tau == pytest.approx(-0.3819660, abs=1e-7)


def test_nesterov_tau_zero_gives_plain_step():
    ls = LineSearchConfig(c=0.5)
    s = state([2.0], tau=0.0, lam=1.0, lam_prev=1.0, k=1)
    out = nesterov_armijo_step(s, QUAD1, ONE, ls)
    plain = sgd_armijo_step(state([2.0], k=1), QUAD1, ONE, ls)
    np.testing.assert_array_equal(out.w, plain.w)


def test_seg_closed_form_single_step():
    ls = LineSearchConfig(c=1 / math.sqrt(2), beta=0.9, reset_option=1)
    s = seg_lipschitz_step(SegState(z=np.array([1.0, 0.0]), eta_prev=1.0), Bilinear1d(), ONE, ls)
    eta = s.eta_prev
    assert eta == pytest.approx(0.6561, abs=1e-15)
    np.testing.assert_allclose(s.z, [1 - eta**2, eta], atol=1e-15)
    np.testing.assert_allclose(s.z, [0.56953279, 0.6561], atol=1e-12)


def test_seg_norm_recursion():
    ls = LineSearchConfig(c=1 / math.sqrt(2), beta=0.9, reset_option=2)
    s = SegState(z=np.array([0.3, -1.2]), eta_prev=1.0)
    for _ in range(50):
        before = float(s.z @ s.z)
        s = seg_lipschitz_step(s, Bilinear1d(), ONE, ls)
        eta = s.eta_prev
        assert float(s.z @ s.z) == pytest.approx(((1 - eta**2) ** 2 + eta**2) * before, abs=1e-12)


def test_seg_on_minimization_oracle():
    # F(w) = w; z+ = (1 - eta + eta^2) w, eta = 0.5 forced by step_cap
    ls = LineSearchConfig(c=0.9)
    s = seg_lipschitz_step(SegState(z=np.ones(1), eta_prev=1.0), QUAD1, ONE, ls,
                           OptimizerOptions(step_cap=0.5))
    assert s.z[0] == pytest.approx(0.75)


def test_seg_zero_operator():
    s = seg_lipschitz_step(SegState(z=np.zeros(2), eta_prev=1.0), Bilinear1d(), ONE, LineSearchConfig())
    np.testing.assert_array_equal(s.z, 0.0)


def test_seg_evaluation_count():
    game = P.gen_bilinear_game(0, 4)
    counted = CountingOracle(game)
    ls = LineSearchConfig(c=1 / math.sqrt(2))
    s = seg_lipschitz_step(SegState(z=np.ones(8), eta_prev=1.0), counted, MiniBatchSampler(4, 1, 0), ls)
    # one evaluation at z, one per check; the last check is reused for the update
    assert counted.grad_evals == 1 + s.last.condition_evals


def test_constant_sgd():
    opts = OptimizerOptions(baseline_eta=0.1)
    s = constant_sgd_step(state([1.0]), P.diag_quadratic([2.0]), ONE, None, opts)
    assert s.w[0] == pytest.approx(0.8)
    s = constant_sgd_step(state([0.0]), QUAD1, ONE, None, opts)
    assert s.w[0] == 0.0
    with pytest.raises(ValueError):
        OptimizerOptions(baseline_eta=0.0)


def test_adam_first_step_and_zero_gradient():
    opts = OptimizerOptions(lr=1e-3)

    class Unit:
        n = 1

        def batch_gradient(self, w, idx):
            return np.ones(1)

    s = adam_step(SgdState(w=np.zeros(1), eta_prev=1e-3), Unit(), ONE, None, opts)
    assert s.w[0] == pytest.approx(-1e-3 / (1 + 1e-8), rel=1e-12)
    zero = SgdState(w=np.zeros(1), eta_prev=1e-3)
    for _ in range(20):
        zero = adam_step(zero, QUAD1, ONE, None, opts)
    assert zero.w[0] == 0.0


@pytest.mark.parametrize("kwargs", [
    {"alpha": 1.0}, {"alpha": -0.1}, {"step_cap": 0.0}, {"lr": 0.0},
    {"beta1": 1.0}, {"beta2": 1.0}, {"epsilon": 0.0},
])
def test_option_validation(kwargs):
    with pytest.raises(ValueError):
        OptimizerOptions(**kwargs)


def test_step_cap_never_exceeded():
    lsq = P.gen_least_squares_interpolated(0, 40, 4)
    ls = LineSearchConfig(eta_max=10.0)
    t = run("sgd_armijo", lsq, batch_size=2, iterations=200, seed=0, linesearch=ls,
            options=OptimizerOptions(step_cap=0.05))
    assert max(t.column("step_size")) <= 0.05


def test_independent_batch_uses_second_stream():
    lsq = P.gen_least_squares_interpolated(0, 40, 4)
    opts = OptimizerOptions(independent_batch=True)
    t1 = run("sgd_armijo", lsq, batch_size=2, iterations=100, seed=0, options=opts)
    t2 = run("sgd_armijo", lsq, batch_size=2, iterations=100, seed=0)
    assert t1.column("step_size") != t2.column("step_size")
    assert t1.column("step_size") == run("sgd_armijo", lsq, batch_size=2, iterations=100,
                                         seed=0, options=opts).column("step_size")
    with pytest.raises(ValueError):
        sgd_armijo_step(state(np.zeros(4)), lsq, MiniBatchSampler(40, 2, 0), LineSearchConfig(), opts)


def test_reset_option_zero_is_non_increasing():
    lsq = P.gen_least_squares_interpolated(1, 60, 6)
    t = run("sgd_armijo", lsq, batch_size=3, iterations=400, seed=2,
            linesearch=LineSearchConfig(reset_option=0))
    steps = t.column("step_size")
    assert all(b <= a for a, b in zip(steps, steps[1:]))


def test_armijo_post_condition_on_every_step():
    lsq = P.gen_least_squares_interpolated(2, 50, 5)
    ls = LineSearchConfig(c=0.3)
    for name in ("sgd_armijo", "polyak_armijo", "nesterov_armijo"):
        s = init_state(name, np.ones(5), ls, OptimizerOptions(alpha=0.5))
        sampler = MiniBatchSampler(50, 5, 11)
        mirror = MiniBatchSampler(50, 5, 11)
        stepper = ALGORITHMS[name]
        for _ in range(100):
            batch = mirror.sample()
            w = s.w.copy()
            s = stepper(s, lsq, sampler, ls, OptimizerOptions(alpha=0.5))
            f_w, g = lsq.batch_value_and_gradient(w, batch)
            assert armijo_holds(lsq, batch, w, g, f_w, s.eta_prev, ls.c)


def test_run_rejects_zero_budget():
    with pytest.raises(ValueError):
        run("sgd_armijo", QUAD1, batch_size=1, iterations=0)
    with pytest.raises(ValueError):
        run("nope", QUAD1, batch_size=1, iterations=1)


def test_run_first_row_on_unit_quadratic():
    t = run("sgd_armijo", QUAD1, batch_size=1, iterations=1, seed=0,
            linesearch=LineSearchConfig(c=0.5), w0=np.ones(1))
    row = t.rows[0]
    assert (row.step_size, row.train_loss, row.epoch) == (1.0, 0.0, 1)
    assert (row.fn_evals, row.grad_evals) == (1, 1)


@pytest.mark.parametrize("algorithm", sorted(ALGORITHMS))
def test_run_is_deterministic_and_counters_monotone(algorithm):
    lsq = P.gen_least_squares_interpolated(4, 30, 3)
    ls = LineSearchConfig(c=0.25)
    a = run(algorithm, lsq, batch_size=3, iterations=60, seed=5, linesearch=ls, keep_params=True)
    b = run(algorithm, lsq, batch_size=3, iterations=60, seed=5, linesearch=ls, keep_params=True)
    for x, y in zip(a.params_history, b.params_history):
        np.testing.assert_array_equal(x, y)
    for col in ("fn_evals", "grad_evals"):
        c = a.column(col)
        assert all(q >= p for p, q in zip(c, c[1:]))
    if algorithm not in ("sgd_constant", "adam"):
        assert all(0.0 < e <= ls.eta_max for e in a.column("step_size"))
    losses = [r.train_loss for r in a.rows]
    assert sum(v is not None for v in losses) == 6


def test_divergence_reports_iteration():
    opts = OptimizerOptions(baseline_eta=1e200)
    with pytest.raises(DivergenceError) as info, np.errstate(over="ignore"):
        run("sgd_constant", P.diag_quadratic([1e200]), batch_size=1, iterations=10, w0=np.ones(1),
            options=opts)
    assert info.value.iteration == 1
