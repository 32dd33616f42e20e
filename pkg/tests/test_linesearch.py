import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from slsopt import problems as P
from slsopt.core import GradientOperator
from slsopt.linesearch import (
    LineSearchConfig,
    armijo_holds,
    backtrack_armijo,
    backtrack_lipschitz,
    curvature_holds,
    goldstein_search,
    lipschitz_holds,
    reset_step,
)


class Recording:
    """Wraps an oracle and records every trial point handed to batch_value."""

    def __init__(self, inner):
        self.inner = inner
        self.points = []

    def __getattr__(self, name):
        return getattr(self.inner, name)

    def batch_value(self, w, idx):
        self.points.append(np.array(w))
        return self.inner.batch_value(w, idx)


class Rotation:
    # F(x, y) = (y, -x)
    n = 1

    def batch_operator(self, z, idx):
        return np.array([z[1], -z[0]])


QUAD4 = P.diag_quadratic([4.0])  # f = 2 w^2
QUAD1 = P.diag_quadratic([1.0])  # f = 0.5 w^2
W1 = np.ones(1)


def test_armijo_boundary_is_accepted():
    g = QUAD4.batch_gradient(W1, [0])
    assert g[0] == 4.0
    assert armijo_holds(QUAD4, [0], W1, g, 2.0, 0.25, 0.5)
    assert not armijo_holds(QUAD4, [0], W1, g, 2.0, 0.3, 0.5)


def test_armijo_with_zero_gradient_always_holds():
    for eta in (1e-6, 1.0, 1e6):
        assert armijo_holds(QUAD1, [0], W1, np.zeros(1), 0.5, eta, 0.5)


def test_backtrack_armijo_on_steep_quadratic():
    out = backtrack_armijo(QUAD4, [0], W1, 1.0, LineSearchConfig(c=0.5, beta=0.9))
    assert out.eta == pytest.approx(0.9**14, rel=1e-12)
    assert out.condition_evals == 15
    assert not out.hit_floor


def test_backtrack_armijo_accepts_first_candidate():
    out = backtrack_armijo(QUAD1, [0], W1, 1.0, LineSearchConfig(c=0.5))
    assert (out.eta, out.condition_evals) == (1.0, 1)


def test_backtrack_armijo_zero_gradient():
    out = backtrack_armijo(QUAD1, [0], np.zeros(1), 0.37, LineSearchConfig())
    assert (out.eta, out.condition_evals) == (0.37, 1)


def test_backtrack_candidates_are_geometric():
    rec = Recording(QUAD4)
    backtrack_armijo(rec, [0], W1, 1.0, LineSearchConfig(c=0.5, beta=0.9))
    etas = [(1.0 - p[0]) / 4.0 for p in rec.points]
    ratios = np.array(etas[1:]) / np.array(etas[:-1])
    np.testing.assert_allclose(ratios, 0.9, rtol=1e-9)


def test_backtrack_hits_floor_when_cap_exhausted():
    out = backtrack_armijo(QUAD4, [0], W1, 1.0, LineSearchConfig(c=0.5, max_backtracks=3))
    assert out.hit_floor and out.condition_evals == 3
    assert out.eta == pytest.approx(0.81)


def test_non_finite_trial_counts_as_failure():
    class Blowup:
        n = 1

        def batch_value(self, w, idx):
            return math.inf if abs(w[0]) > 0.5 else 0.5 * w[0] ** 2

        def batch_value_and_gradient(self, w, idx):
            return 0.5 * w[0] ** 2, w.copy()

    out = backtrack_armijo(Blowup(), [0], np.array([2.0]), 1.0, LineSearchConfig(c=0.1))
    assert abs(2.0 - 2.0 * out.eta) <= 0.5


def test_reset_step_options():
    cfg = LineSearchConfig(eta_max=1.0, gamma=2.0)
    for opt in (0, 1, 2):
        assert reset_step(0.3, LineSearchConfig(reset_option=opt), 1, 1, 1) == 1.0
    assert reset_step(0.3, LineSearchConfig(reset_option=0), 1, 1, 5) == 0.3
    assert reset_step(0.3, LineSearchConfig(reset_option=1), 1, 1, 5) == 1.0
    assert reset_step(0.5, cfg, 100, 1000, 2) == pytest.approx(0.5 * 2**0.1, rel=1e-12)
    assert reset_step(0.9, cfg, 100, 100, 2) == 1.0


@pytest.mark.parametrize("kwargs", [
    {"c": 0.0}, {"c": 1.0}, {"beta": 1.0}, {"beta": 0.0}, {"gamma": 0.5},
    {"eta_max": 0.0}, {"reset_option": 3}, {"max_backtracks": 0},
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        LineSearchConfig(**kwargs)


def test_goldstein_accepts_inside_window():
    out = goldstein_search(QUAD1, [0], W1, 1.0, LineSearchConfig(c=0.1, eta_max=10.0))
    assert (out.eta, out.condition_evals) == (1.0, 1)


def test_goldstein_grows_small_step():
    out = goldstein_search(QUAD1, [0], W1, 0.05, LineSearchConfig(c=0.1, gamma=1.5, eta_max=10.0))
    assert out.eta == pytest.approx(0.253125, rel=1e-12)
    assert out.condition_evals == 5


def test_goldstein_zero_gradient_accepts_input():
    out = goldstein_search(QUAD1, [0], np.zeros(1), 0.4, LineSearchConfig(c=0.1))
    assert (out.eta, out.condition_evals) == (0.4, 1)


def test_goldstein_rejects_large_c():
    with pytest.raises(ValueError):
        goldstein_search(QUAD1, [0], W1, 1.0, LineSearchConfig(c=0.6))


def test_goldstein_capped_at_eta_max():
    # window for L=0.01 starts at 2c/L = 20 > eta_max
    out = goldstein_search(P.diag_quadratic([0.01]), [0], W1, 1.0, LineSearchConfig(c=0.1, eta_max=1.0))
    assert out.capped and out.eta == 1.0


def test_lipschitz_condition_boundary():
    op = GradientOperator(P.diag_quadratic([2.0]))  # f = w^2, F = 2w
    Fz = op.batch_operator(W1, [0])
    assert lipschitz_holds(op, [0], W1, Fz, 0.125, 0.25)
    assert not lipschitz_holds(op, [0], W1, Fz, 0.2, 0.25)
    assert lipschitz_holds(op, [0], np.zeros(1), np.zeros(1), 5.0, 0.25)


def test_backtrack_lipschitz_quadratic():
    op = GradientOperator(P.diag_quadratic([2.0]))
    out = backtrack_lipschitz(op, [0], W1, 1.0, LineSearchConfig(c=0.25, beta=0.9))
    assert out.eta == pytest.approx(0.9**20, rel=1e-12)
    assert out.condition_evals == 21


def test_backtrack_lipschitz_rotation():
    out = backtrack_lipschitz(Rotation(), [0], np.array([1.0, 0.0]), 1.0,
                              LineSearchConfig(c=1 / math.sqrt(2), beta=0.9))
    assert out.eta == pytest.approx(0.6561, abs=1e-15)
    assert out.condition_evals == 5


def test_backtrack_lipschitz_zero_operator():
    out = backtrack_lipschitz(Rotation(), [0], np.zeros(2), 0.7, LineSearchConfig())
    assert (out.eta, out.condition_evals) == (0.7, 1)


@settings(max_examples=200, deadline=None)
@given(L=st.floats(0.01, 1e3), c=st.floats(0.01, 0.99), beta=st.floats(0.1, 0.95),
       w=st.floats(-1e3, 1e3).filter(lambda x: abs(x) > 1e-6))
def test_armijo_step_bounds_on_quadratics(L, c, beta, w):
    cfg = LineSearchConfig(c=c, beta=beta, eta_max=1.0)
    oracle = P.diag_quadratic([L])
    wv = np.array([w])
    out = backtrack_armijo(oracle, [0], wv, 1.0, cfg)
    assume(not out.hit_floor)
    assert out.eta >= beta * min(2 * (1 - c) / L, 1.0) * (1 - 1e-12)
    assert out.eta <= min(1 / (2 * c * L), 1.0) / beta * (1 + 1e-12)
    f_w, g = oracle.batch_value_and_gradient(wv, [0])
    assert armijo_holds(oracle, [0], wv, g, f_w, out.eta, c)


@settings(max_examples=200, deadline=None)
@given(L=st.floats(0.01, 1e3), c=st.floats(0.01, 0.99), eta_max=st.floats(0.01, 10.0))
def test_lipschitz_step_lower_bound(L, c, eta_max):
    op = GradientOperator(P.diag_quadratic([L]))
    cfg = LineSearchConfig(c=c, beta=0.9, eta_max=eta_max)
    out = backtrack_lipschitz(op, [0], W1, eta_max, cfg)
    assume(not out.hit_floor)
    assert out.eta >= 0.9 * min(c / L, eta_max) * (1 - 1e-12)
    assert lipschitz_holds(op, [0], W1, op.batch_operator(W1, [0]), out.eta, c)


@settings(max_examples=200, deadline=None)
@given(L=st.floats(0.05, 50.0), c=st.floats(0.01, 0.5), eta_in=st.floats(1e-4, 5.0))
def test_goldstein_steps_satisfy_both_inequalities(L, c, eta_in):
    oracle = P.diag_quadratic([L])
    cfg = LineSearchConfig(c=c, eta_max=100.0)
    out = goldstein_search(oracle, [0], W1, eta_in, cfg)
    if out.hit_floor or out.capped:
        return
    f_w, g = oracle.batch_value_and_gradient(W1, [0])
    f_t = oracle.batch_value(W1 - out.eta * g, [0])
    assert armijo_holds(oracle, [0], W1, g, f_w, out.eta, c)
    assert curvature_holds(f_t, f_w, float(g @ g), out.eta, c)
