from fractions import Fraction as Q

import numpy as np
import pytest

from compact_euler.psi import (
    PsiSolution,
    integrate_psi,
    psi_ode_residual,
    solve_psi,
    verify_tv_transform,
)
from compact_euler.series import Series1D

REFERENCE = [Q(1), Q(-3, 4), Q(9, 128), Q(-21, 1024), Q(1035, 131072), Q(-1809, 524288)]


def test_reference_coefficients():
    assert list(solve_psi(5).series.coeffs) == REFERENCE


def test_prefix_stable_across_orders(psi20):
    assert psi20.series.coeffs[:6] == tuple(REFERENCE)
    assert solve_psi(12).series.coeffs == psi20.series.coeffs[:13]


@pytest.mark.parametrize("n", [5, 10, 20])
def test_residual_vanishes(n):
    res = psi_ode_residual(solve_psi(n))
    assert res.is_zero()
    assert res.order >= n - 1


def test_perturbed_coefficient_breaks_residual():
    c = list(REFERENCE)
    c[1] += Q(1, 1000)
    assert not psi_ode_residual(Series1D.from_coeffs(c)).is_zero()


def test_constant_series_is_a_formal_solution():
    # every term carries psi' or psi'', so only the Cauchy data pins down the branch
    assert psi_ode_residual(Series1D.constant(1, 5)).is_zero()


def test_rejects_small_order():
    with pytest.raises(ValueError):
        solve_psi(0)


def test_tv_transform(psi20):
    e = verify_tv_transform(psi20)
    assert e["status"] == "pass"
    assert e["v0"] == Q(-3, 4)
    c = list(psi20.series.coeffs)
    c[3] += Q(1, 1000)
    assert verify_tv_transform(Series1D.from_coeffs(c))["status"] == "fail"


def test_runge_kutta_agreement(psi20):
    xs = np.array([0.02, 0.05, 0.08, 0.1])
    series = psi20.evaluate(xs)
    rk = integrate_psi(psi20, xs)
    assert np.max(np.abs(series - rk)) <= 1e-9
    assert abs(psi20.evaluate(0.05) - integrate_psi(psi20, np.array([0.05]))[0]) <= 1e-9


def test_truncation_agreement():
    lo, hi = solve_psi(15), solve_psi(20)
    xs = np.linspace(-0.1, 0.1, 21)
    assert np.max(np.abs(lo.evaluate(xs) - hi.evaluate(xs))) <= 1e-12


def test_growth_rate_suggests_finite_radius(psi20):
    rate = psi20.growth_rate()
    assert 0.2 < rate < 2.0


def test_evaluate_error_estimate(psi20):
    v, err = psi20.evaluate(0.1, with_error=True)
    assert err < 1e-15
    assert isinstance(psi20, PsiSolution)
