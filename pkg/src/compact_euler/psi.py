"""Series solution of the singular Cauchy problem

    3x psi'' + 6x (psi')^3 - 4 psi (psi')^2 - 3 psi' = 0,   psi(0) = 1, psi'(0) = -3/4.

x = 0 is a singular point, so the solution is built coefficient by coefficient.
Each degree of the equation is affine in exactly one new coefficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import solve_ivp

from .series import DEFAULT_RADIUS, Series1D

PSI0 = Fraction(1)
DPSI0 = Fraction(-3, 4)


class SolverDegeneracyError(RuntimeError):
    """The recursion met a vanishing pivot; this signals an implementation bug."""


def psi_ode_lhs(psi: Series1D) -> Series1D:
    """Left-hand side of the ODE evaluated on a truncated series.

    The factor ``x`` enters through an exact shift, so the result is known
    through degree ``psi.order - 1``.
    """
    d1 = psi.diff()
    d2 = d1.diff()
    return 3 * d2.shift(1) + 6 * (d1 * d1 * d1).shift(1) - 4 * psi * d1 * d1 - 3 * d1


@dataclass(frozen=True)
class PsiSolution:
    series: Series1D
    radius: float = DEFAULT_RADIUS

    @property
    def order(self) -> int:
        return self.series.order

    def evaluate(self, x, with_error: bool = False):
        return self.series.evaluate(x, radius=self.radius, with_error=with_error)

    def derivative(self, k: int = 1) -> Series1D:
        s = self.series
        for _ in range(k):
            s = s.diff()
        return s

    def growth_rate(self) -> float:
        """Root-test estimate ``|c_N|^(1/N)``; its inverse hints at the convergence radius."""
        nz = [(k, c) for k, c in enumerate(self.series.coeffs) if k and c]
        k, c = nz[-1]
        return math.exp(math.log(abs(float(c))) / k)


def solve_psi(order: int = 20, *, radius: float = DEFAULT_RADIUS) -> PsiSolution:
    """Exact series for psi truncated at ``order`` (requires ``order >= 2``)."""
    if order < 2:
        raise ValueError("order must be at least 2")
    coeffs = [PSI0, DPSI0]
    for n in range(1, order):
        # degree-n equation is affine in c_{n+1}; read off offset and slope
        base = psi_ode_lhs(Series1D.from_coeffs(coeffs + [0]))[n]
        slope = psi_ode_lhs(Series1D.from_coeffs(coeffs + [1]))[n] - base
        if slope == 0:
            raise SolverDegeneracyError(f"vanishing pivot at degree {n}")
        coeffs.append(-base / slope)
    return PsiSolution(Series1D.from_coeffs(coeffs), radius)


def psi_ode_residual(sol: PsiSolution | Series1D) -> Series1D:
    series = sol.series if isinstance(sol, PsiSolution) else sol
    return psi_ode_lhs(series)


def tv_transform_sides(psi: Series1D) -> tuple[Series1D, Series1D, Series1D]:
    """Both sides of the first-order equation in ``t = x/psi^2``, ``v = psi psi'``.

    ``t dv/dt = v(4v/3 + 1) + t v^2 (2v + 9) / (3 (1 - 2 t v))``, with ``dv/dt``
    rewritten as ``v'(x) / t'(x)``. Returns ``(lhs, rhs, v)`` as series in x.
    """
    v = psi * psi.diff()
    t = (psi ** -2).shift(1)
    lhs = t * v.diff() / t.diff()
    rhs = v * (Fraction(4, 3) * v + 1) + t * v * v * (2 * v + 9) / (3 * (1 - 2 * t * v))
    return lhs, rhs, v


def verify_tv_transform(sol: PsiSolution | Series1D) -> dict:
    series = sol.series if isinstance(sol, PsiSolution) else sol
    lhs, rhs, v = tv_transform_sides(series)
    diff = lhs - rhs
    return {
        "name": "psi_tv_transform",
        "anchor": "t,v change of variables for psi",
        "degree": diff.order,
        "v0": v[0],
        "max_abs_residual": float(diff.max_abs_coeff()),
        "tolerance": 0.0,
        "status": "pass" if diff.is_zero() and v[0] == DPSI0 else "fail",
    }


def _rhs(x, state):
    psi, dpsi = state
    return [dpsi, (4 * psi * dpsi**2 + 3 * dpsi - 6 * x * dpsi**3) / (3 * x)]


def integrate_psi(sol: PsiSolution, x_end, x_start: float = 0.01, rtol: float = 1e-13, atol: float = 1e-15):
    """Integrate the ODE numerically from series data at ``x_start`` (away from 0)."""
    x_end = np.atleast_1d(np.asarray(x_end, dtype=float))
    y0 = [sol.series.evaluate(x_start, radius=None), sol.derivative().evaluate(x_start, radius=None)]
    span_end = x_end[np.argmax(np.abs(x_end - x_start))]
    out = solve_ivp(_rhs, (x_start, span_end), y0, method="DOP853", rtol=rtol, atol=atol, dense_output=True)
    if not out.success:
        raise RuntimeError(out.message)
    return out.sol(x_end)[0]
