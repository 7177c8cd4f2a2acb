from fractions import Fraction as Q

import numpy as np
import pytest

from compact_euler.alpha import (
    AlphaSolution,
    alpha_pde_residuals,
    ansatz_oracle,
    eval_alpha,
    float_pde_residuals,
    slice_residuals,
    solve_alpha,
    verify_minimum,
)
from compact_euler.series import Series2D


def test_cubic_jet(alpha20):
    s = alpha20.series
    low = {k: v for k, v in s.terms.items() if sum(k) <= 3}
    assert low == {(2, 0): 2, (0, 2): 2, (3, 0): 3, (1, 2): 3}


def test_quartic_and_quintic_blocks(alpha20):
    s = alpha20.series
    assert s.block(4) == {(0, 4): Q(11, 8), (2, 2): Q(15, 4), (4, 0): Q(19, 8)}
    assert s.block(5) == {(1, 4): Q(3, 2), (3, 2): 3, (5, 0): Q(3, 2)}


def test_even_in_y(alpha20):
    assert alpha20.series.is_even_in(1)


def test_residuals_vanish(alpha20, profiles20):
    r1, r2 = alpha_pde_residuals(alpha20, profiles20)
    assert r1.is_zero() and r2.is_zero()
    assert r1.order >= 18 and r2.order >= 18


@pytest.mark.slow
def test_ansatz_oracle_agrees(alpha20):
    oracle = ansatz_oracle(5)
    assert all(alpha20.coeff(*k) == v for k, v in oracle.items())


def test_perturbed_quadratic_breaks_second_equation(alpha20, profiles20):
    terms = dict(alpha20.series.terms)
    terms[(0, 2)] += Q(1, 1000)
    bad = Series2D(terms, alpha20.order, alpha20.series.point)
    r1, r2 = alpha_pde_residuals(bad, profiles20)
    assert not r2.is_zero()


def test_slice_on_G_zero_set(alpha20, profiles20):
    first, g = slice_residuals(alpha20, profiles20)
    assert first.is_zero() and g.is_zero()


def test_strict_minimum(alpha20):
    e = verify_minimum(alpha20)
    assert e["status"] == "pass"
    assert alpha20.hessian() == [[4, 0], [0, 4]]
    assert alpha20.value(1.02, 0.01) > 0


def test_symmetry_in_y(alpha20):
    xs = np.linspace(0.95, 1.05, 5)
    ys = np.linspace(0.0, 0.05, 5)
    np.testing.assert_allclose(alpha20.value(xs, ys), alpha20.value(xs, -ys), rtol=0, atol=1e-16)


def test_eval_point(alpha20, profiles20):
    e1, e2 = float_pde_residuals(alpha20, profiles20, 1.03, 0.02)
    assert abs(e2) <= 1e-10
    assert abs(e1) <= 1e-10
    d = eval_alpha(alpha20, 1.03, 0.02)
    assert d["a"] > 0


def test_sign_of_y_derivative(alpha20):
    for y in (-0.03, -0.01, 0.01, 0.03):
        assert np.sign(alpha20.derivative(1.01, y, 0, 1)) == np.sign(y)


def test_order_too_small():
    with pytest.raises(ValueError):
        solve_alpha(order=2)


def test_small_order_runs():
    sol = solve_alpha(order=3)
    assert isinstance(sol, AlphaSolution)
    assert sol.coeff(3, 0) == 3
