"""The profiles F(x, a), G(x, a), H(a) built from psi, and their structural identities.

F and G are stored as bivariate series in ``(X, A) = (x - 1, a)`` about ``(x, a) = (1, 0)``;
H is univariate in ``a``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .psi import PsiSolution, solve_psi
from .series import DEFAULT_RADIUS, Series1D, Series2D

CLAMP_TOL = 1e-12
POINT = (Fraction(1), Fraction(0))


class ProfileDomainError(ValueError):
    """G or H is clearly negative: the point lies outside the construction region."""


def _x_poly(coeffs: dict[int, int], order: int) -> Series2D:
    """A polynomial in x = 1 + X, re-expanded exactly about X = 0."""
    out = Series2D.constant(0, order, POINT)
    one_plus_x = Series2D.polynomial({(0, 0): 1, (1, 0): 1}, order, POINT)
    for k, c in coeffs.items():
        out = out + c * one_plus_x**k
    return out


@dataclass(frozen=True)
class ProfileSet:
    F: Series2D
    G: Series2D
    H: Series1D
    psi: PsiSolution

    @property
    def order(self) -> int:
        return min(self.F.order, self.G.order, self.H.order)


def build_H(psi: Series1D) -> Series1D:
    d1 = psi.diff()
    return (6 * (1 / d1 + 2 * psi)).shift(1)


def build_profiles(psi: PsiSolution | None = None, order: int = 20) -> ProfileSet:
    if psi is None:
        psi = solve_psi(order)
    if psi.order < order:
        raise ValueError(f"psi has order {psi.order} < {order}")
    s = psi.series.truncate(order)
    psi_a = Series2D.from_univariate(s, var=1, point=POINT)
    H = build_H(s).truncate(order)
    H_a = Series2D.from_univariate(H, var=1, point=POINT)
    A = Series2D.polynomial({(0, 1): 1}, order, POINT)
    F = -2 * _x_poly({1: 1}, order) * psi_a + _x_poly({3: 2}, order)
    G = 12 * _x_poly({2: 1}, order) * A - F * F - H_a
    return ProfileSet(F, G, H, psi)


def e2b_residual(F: Series2D) -> Series2D:
    """``x dF/dx - F - 4x^3`` at fixed a."""
    n = F.order
    return _x_poly({1: 1}, n) * F.diff(0) - F - _x_poly({3: 4}, n)


def e2a_residual(F: Series2D, G: Series2D) -> Series2D:
    """``dG/dx + F dG/da - 2 G dF/da``."""
    return G.diff(0) + F * G.diff(1) - 2 * G * F.diff(1)


def _entry(name: str, anchor: str, residual: Series2D) -> dict:
    return {
        "name": name,
        "anchor": anchor,
        "identity": name,
        "degree": residual.order,
        "max_abs_residual_coeff": str(residual.max_abs_coeff()),
        "max_abs_residual": float(residual.max_abs_coeff()),
        "tolerance": 0.0,
        "status": "pass" if residual.is_zero() else "fail",
    }


def verify_e2b(p: ProfileSet) -> dict:
    return _entry("profile_identity_e2b", "x dF/dx - F = 4x^3", e2b_residual(p.F))


def verify_e2a(p: ProfileSet) -> dict:
    return _entry("profile_identity_e2a", "dG/dx + F dG/da = 2G dF/da", e2a_residual(p.F, p.G))


def H_prime_identity(p: ProfileSet) -> Series1D:
    """``H'(a) - 24 a psi'(a) - 4 psi(a)``, zero iff psi solves the ODE."""
    s = p.psi.series
    return p.H.diff() - (24 * s.diff()).shift(1) - 4 * s


def _clamp(values, label: str):
    v = np.asarray(values, dtype=float)
    if np.any(v < -CLAMP_TOL):
        raise ProfileDomainError(f"{label} = {v.min():.3e} < 0: outside the construction region")
    v = np.where(v < 0, 0.0, v)
    return v if v.ndim else float(v)


def eval_profiles(p: ProfileSet, x, a, radius: float = DEFAULT_RADIUS, clamp: bool = True):
    """Series evaluation of ``(F, G, H)`` at absolute ``x`` and ``a``."""
    F = p.F.evaluate(x, a, radius=radius)
    G = p.G.evaluate(x, a, radius=radius)
    H = p.H.evaluate(a, radius=radius)
    if clamp:
        G = _clamp(G, "G")
        H = _clamp(H, "H")
    return F, G, H


def closed_form_profiles(psi: PsiSolution, x, a, radius: float = DEFAULT_RADIUS):
    """``(F, G, H)`` from the defining formulas, using only point values of psi and psi'."""
    x = np.asarray(x, dtype=float)
    a = np.asarray(a, dtype=float)
    ps = psi.series.evaluate(a, radius=radius)
    dps = psi.derivative().evaluate(a, radius=radius)
    F = -2 * x * ps + 2 * x**3
    H = 6 * a * (1 / dps + 2 * ps)
    G = 12 * x**2 * a - F**2 - H
    return F, G, H


def H_derivative(p: ProfileSet) -> Series1D:
    return p.H.diff()


def linear_part(s: Series2D) -> tuple[Fraction, Fraction, Fraction]:
    return s.coeff(0, 0), s.coeff(1, 0), s.coeff(0, 1)
