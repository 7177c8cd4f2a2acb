import numpy as np
import pytest

from compact_euler.field import (
    FieldSample,
    Flow,
    bernoulli_residuals,
    divergence,
    euler_residual,
    field_report,
    grad_shafranov_residual,
    standard_grid,
    u_dot_grad_p,
)
from compact_euler.series import DomainError


def test_zero_on_circle(flow1):
    s = flow1.sample(1.0, 0.0)
    assert s.p == 0
    assert s.u_rho == 0 and s.u_phi == 0 and s.u_z == 0


def test_speed_is_three_p(flow1):
    s = flow1.sample(1.03, 0.02)
    assert s.speed_sq / (3 * s.p) == pytest.approx(1, abs=1e-8)


def test_swirl_like_sqrt_a(flow1):
    s = flow1.sample(1.001, 0.0005)
    assert s.b == pytest.approx(0.5 * np.sqrt(s.a), rel=1e-2)
    # u_phi^2 / a stays bounded towards the circle
    ratios = [flow1.sample(1 + t, t).u_phi ** 2 / flow1.sample(1 + t, t).a for t in (1e-2, 1e-3, 1e-4)]
    assert max(ratios) < 1.0 and min(ratios) > 0.1


def test_axis_rejected(flow1):
    with pytest.raises(DomainError):
        flow1.sample(0.0, 0.0)


def test_outside_chart_rejected(flow1):
    with pytest.raises(DomainError):
        flow1.sample(1.5, 0.0)


def test_euler_residual_point(flow1):
    r = euler_residual(1.03, 0.01, flow1, 1e-3)
    assert max(abs(float(c)) for c in r) <= 1e-7
    assert abs(float(r[1])) <= 1e-9


def test_wrong_field_detected(flow1):
    def no_swirl(rho, z):
        s = flow1.sample(rho, z)
        return FieldSample(s.u_rho, 0 * s.u_phi, s.u_z, s.p, s.a, 0 * s.b)

    good = euler_residual(1.03, 0.01, flow1, 1e-3)[0]
    bad = euler_residual(1.03, 0.01, flow1, 1e-3, sampler=no_swirl)[0]
    s = flow1.sample(1.03, 0.01)
    # the missing centripetal term u_phi^2 / rho
    assert abs(float(bad)) == pytest.approx(float(s.u_phi**2 / 1.03), rel=1e-6)
    assert abs(float(bad)) > 1e4 * abs(float(good))


def test_divergence_point(flow1):
    assert abs(float(divergence(1.02, 0.03, flow1))) <= 1e-8


def test_divergence_scale_free(flow1, flow2):
    d1 = abs(float(divergence(1.02, 0.03, flow1, 1e-3)))
    d2 = abs(float(divergence(2.04, 0.06, flow2, 2e-3))) / 2
    assert d2 <= 1e-8 and d1 <= 1e-8


def test_bernoulli_point(flow1):
    q, b = bernoulli_residuals(1.03, 0.02, flow1)
    assert abs(float(q)) <= 1e-9 and abs(float(b)) <= 1e-9
    q0, b0 = bernoulli_residuals(1.0, 0.0, flow1)
    assert q0 == 0 and b0 == 0
    assert abs(float(u_dot_grad_p(1.04, -0.02, flow1))) <= 1e-8


def test_grad_shafranov(flow1):
    assert abs(float(grad_shafranov_residual(1.02, 0.01, flow1))) <= 1e-6
    # on the circle both sides equal 8
    assert abs(float(grad_shafranov_residual(1.0, 0.0, flow1))) <= 1e-6


def test_grad_shafranov_perturbation(flow1):
    class Scaled:
        def __init__(self, alpha):
            self.alpha = alpha
            self.radius = alpha.radius

        def derivative(self, x, y, dx=0, dy=0):
            return 1.01 * self.alpha.derivative(x, y, dx, dy)

    bad = Flow(Scaled(flow1.alpha), flow1.H, 1.0)
    assert abs(float(grad_shafranov_residual(1.02, 0.01, bad))) > 1e-3


def test_grad_shafranov_requires_unit_radius(flow2):
    with pytest.raises(ValueError):
        grad_shafranov_residual(2.02, 0.0, flow2)


def test_scaling(flow1, flow2):
    s1 = flow1.sample(1.02, 0.01)
    s2 = flow2.sample(2.04, 0.02)
    assert s2.p == pytest.approx(16 * s1.p, rel=1e-13)
    assert s2.u_rho == pytest.approx(4 * s1.u_rho, rel=1e-12)
    assert s2.u_phi == pytest.approx(4 * s1.u_phi, rel=1e-12)


def test_fourth_order_convergence(flow1):
    # direct differencing of u_phi at a point well away from the circle
    res = [abs(float(euler_residual(1.03, 0.01, flow1, h, phi_mode="direct")[1])) for h in (8e-3, 4e-3)]
    assert res[0] / res[1] == pytest.approx(16, rel=0.15)


def test_grid_excludes_circle():
    rho, z = standard_grid(1.0, 0.03, 41)
    assert rho.size == 41 * 41 - 1
    assert not np.any((rho == 1.0) & (z == 0.0))


@pytest.mark.parametrize("R", [0.5, 1.0, 2.0])
def test_report_passes(alpha20, profiles20, R):
    entries = field_report(Flow(alpha20, profiles20.H, R), n=21)
    assert all(e["status"] == "pass" for e in entries), entries
    assert any(e["name"] == "grad_shafranov" for e in entries) == (R == 1.0)
