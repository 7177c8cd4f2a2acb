"""Axisymmetric velocity and pressure fields near the circle rho = R, z = 0.

With ``a = alpha(rho/R, z/R)``::

    p = a R^4 / 4,    b = (R^3 / 4) sqrt(H(a)),
    u = (dp/dz e_rho - dp/drho e_z + b e_phi) / rho.

Velocity components use exact series derivatives of alpha. All verification
derivatives (Euler residuals, divergence, u.grad p, Grad-Shafranov) are taken
by fourth-order central differences on the assembled fields, so the two paths
share no derivative code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .alpha import AlphaSolution, solve_alpha
from .profiles import CLAMP_TOL, ProfileDomainError, ProfileSet, build_profiles
from .series import DomainError, Series1D


@dataclass
class FieldSample:
    u_rho: np.ndarray
    u_phi: np.ndarray
    u_z: np.ndarray
    p: np.ndarray
    a: np.ndarray
    b: np.ndarray

    @property
    def speed_sq(self) -> np.ndarray:
        return self.u_rho**2 + self.u_phi**2 + self.u_z**2


@dataclass(frozen=True)
class Flow:
    """The unmodulated flow for a given circle radius ``R``."""

    alpha: AlphaSolution
    H: Series1D
    R: float = 1.0

    @classmethod
    def build(cls, order: int = 20, R: float = 1.0, radius: float = 0.1,
              profiles: ProfileSet | None = None) -> "Flow":
        if profiles is None:
            profiles = build_profiles(order=order)
        return cls(solve_alpha(profiles, order, radius=radius), profiles.H, R)

    @property
    def chart_radius(self) -> float:
        return self.alpha.radius

    def in_chart(self, rho, z) -> np.ndarray:
        X = np.asarray(rho, dtype=float) / self.R - 1
        Y = np.asarray(z, dtype=float) / self.R
        r = self.chart_radius
        return (np.abs(X) <= r) & (np.abs(Y) <= r)

    def alpha_at(self, rho, z, dx: int = 0, dy: int = 0):
        return self.alpha.derivative(np.asarray(rho, dtype=float) / self.R, np.asarray(z, dtype=float) / self.R, dx, dy)

    def H_of(self, a):
        h = np.asarray(self.H.evaluate(a, radius=None))
        if np.any(h < -CLAMP_TOL):
            raise ProfileDomainError(f"H(a) = {h.min():.3e} < 0")
        return np.maximum(h, 0.0)

    def sample(self, rho, z) -> FieldSample:
        rho = np.asarray(rho, dtype=float)
        z = np.asarray(z, dtype=float)
        if np.any(rho <= 0):
            raise DomainError("rho must be positive (the axis is excluded)")
        R = self.R
        a = np.asarray(self.alpha_at(rho, z))
        ax = np.asarray(self.alpha_at(rho, z, 1, 0))
        ay = np.asarray(self.alpha_at(rho, z, 0, 1))
        p = a * R**4 / 4
        dp_drho = R**3 * ax / 4
        dp_dz = R**3 * ay / 4
        b = R**3 / 4 * np.sqrt(self.H_of(a))
        return FieldSample(dp_dz / rho, b / rho, -dp_drho / rho, p, a, b)


def sample_field(rho, z, flow: Flow) -> FieldSample:
    return flow.sample(rho, z)


def d4(f, x, h: float):
    """Fourth-order central difference of ``f`` at ``x``."""
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


def d4_second(f, x, h: float):
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h)


def _stencil_derivs(sampler, rho, z, h: float) -> dict[str, np.ndarray]:
    """Central-difference partials of every sampled quantity in rho and z."""
    offsets = (2, 1, -1, -2)
    weights = (-1, 8, -8, 1)
    out: dict[str, np.ndarray] = {}
    for axis in ("rho", "z"):
        acc = None
        for k, w in zip(offsets, weights):
            s = sampler(rho + k * h, z) if axis == "rho" else sampler(rho, z + k * h)
            vals = {"u_rho": s.u_rho, "u_phi": s.u_phi, "u_phi_sq": s.u_phi**2, "u_z": s.u_z, "p": s.p,
                    "rho_u_rho": (rho + k * h if axis == "rho" else rho) * s.u_rho}
            if acc is None:
                acc = {n: w * v for n, v in vals.items()}
            else:
                for n, v in vals.items():
                    acc[n] = acc[n] + w * v
        for n, v in acc.items():
            out[f"d{axis}_{n}"] = v / (12 * h)
    return out


def _phi_derivs(s: FieldSample, d: dict, phi_mode: str):
    if phi_mode == "direct":
        return d["drho_u_phi"], d["dz_u_phi"]
    # u_phi ~ sqrt(a) is only Lipschitz at the circle while u_phi^2 is analytic,
    # so differentiate the square wherever u_phi is nonzero
    nz = s.u_phi != 0
    safe = np.where(nz, 2 * s.u_phi, 1.0)
    dr = np.where(nz, d["drho_u_phi_sq"] / safe, d["drho_u_phi"])
    dz = np.where(nz, d["dz_u_phi_sq"] / safe, d["dz_u_phi"])
    return dr, dz


def euler_residual(rho, z, flow: Flow, h: float = 1e-3, sampler=None,
                   phi_mode: str = "squared") -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Residuals of the cylindrical steady Euler system (rho, phi, z components).

    ``phi_mode="direct"`` differences u_phi itself, which loses accuracy when
    the stencil passes close to the circle.
    """
    sampler = sampler or flow.sample
    rho = np.asarray(rho, dtype=float)
    z = np.asarray(z, dtype=float)
    s = sampler(rho, z)
    d = _stencil_derivs(sampler, rho, z, h)
    dphi_r, dphi_z = _phi_derivs(s, d, phi_mode)
    r_rho = s.u_rho * d["drho_u_rho"] + s.u_z * d["dz_u_rho"] - s.u_phi**2 / rho + d["drho_p"]
    r_phi = s.u_rho * dphi_r + s.u_z * dphi_z + s.u_rho * s.u_phi / rho
    r_z = s.u_rho * d["drho_u_z"] + s.u_z * d["dz_u_z"] + d["dz_p"]
    return r_rho, r_phi, r_z


def divergence(rho, z, flow: Flow, h: float = 1e-3, sampler=None) -> np.ndarray:
    sampler = sampler or flow.sample
    rho = np.asarray(rho, dtype=float)
    d = _stencil_derivs(sampler, rho, np.asarray(z, dtype=float), h)
    return d["drho_rho_u_rho"] / rho + d["dz_u_z"]


def u_dot_grad_p(rho, z, flow: Flow, h: float = 1e-3, sampler=None) -> np.ndarray:
    sampler = sampler or flow.sample
    s = sampler(rho, z)
    d = _stencil_derivs(sampler, np.asarray(rho, dtype=float), np.asarray(z, dtype=float), h)
    return s.u_rho * d["drho_p"] + s.u_z * d["dz_p"]


def bernoulli_residuals(rho, z, flow: Flow) -> tuple[np.ndarray, np.ndarray]:
    """``|u|^2 - 3p`` and ``(p + |u|^2/2) - 5p/2``."""
    s = flow.sample(rho, z)
    q = s.speed_sq
    return q - 3 * s.p, (s.p + q / 2) - 2.5 * s.p


def grad_shafranov_residual(rho, z, flow: Flow, h: float = 1e-3) -> np.ndarray:
    """``(d_rr + d_zz - d_r / rho) Psi - 10 rho^2 + H'(Psi) / 2`` with ``Psi = a`` and R = 1."""
    if flow.R != 1:
        raise ValueError("the Grad-Shafranov form is stated for R = 1")
    rho = np.asarray(rho, dtype=float)
    z = np.asarray(z, dtype=float)

    def psi_r(r):
        return np.asarray(flow.alpha_at(r, z))

    def psi_z(zz):
        return np.asarray(flow.alpha_at(rho, zz))

    lhs = d4_second(psi_r, rho, h) + d4_second(psi_z, z, h) - d4(psi_r, rho, h) / rho
    a = psi_r(rho)
    dH = flow.H.diff().evaluate(a, radius=None)
    return lhs - (10 * rho**2 - 0.5 * dH)


def standard_grid(R: float = 1.0, half_width: float = 0.03, n: int = 41, exclude_circle: bool = True):
    """Flattened ``(rho, z)`` of an n x n grid on ``R * ([1-w, 1+w] x [-w, w])``."""
    g = np.linspace(-half_width, half_width, n)
    X, Y = np.meshgrid(g, g, indexing="ij")
    rho = R * (1 + X.ravel())
    z = R * Y.ravel()
    if exclude_circle:
        keep = ~((np.abs(X.ravel()) < 1e-15) & (np.abs(Y.ravel()) < 1e-15))
        rho, z = rho[keep], z[keep]
    return rho, z


def field_report(flow: Flow, half_width: float = 0.03, n: int = 41, h: float = 1e-3) -> list[dict]:
    """Maximum residual of every pointwise identity on the standard grid (circle excluded).

    Residuals are divided by their natural power of R so bounds are R-independent;
    ``h`` is the step in units of R.
    """
    R = flow.R
    rho, z = standard_grid(R, half_width, n)
    hh = h * R
    r_rho, r_phi, r_z = euler_residual(rho, z, flow, hh)
    div = divergence(rho, z, flow, hh)
    bern, bfun = bernoulli_residuals(rho, z, flow)
    udp = u_dot_grad_p(rho, z, flow, hh)
    entries = [
        ("euler_rho", "steady axisymmetric Euler momentum", r_rho / R**3, 1e-6),
        ("euler_phi", "steady axisymmetric Euler momentum", r_phi / R**3, 1e-6),
        ("euler_z", "steady axisymmetric Euler momentum", r_z / R**3, 1e-6),
        ("divergence", "incompressibility", div / R, 1e-8),
        ("speed_sq_minus_3p", "|u|^2 = 3p", bern / R**4, 1e-9),
        ("bernoulli_minus_5p_2", "p + |u|^2/2 = 5p/2", bfun / R**4, 1e-9),
        ("u_dot_grad_p", "u.grad p = 0", udp / R**5, 1e-8),
    ]
    if R == 1:
        entries.append(("grad_shafranov", "Grad-Shafranov form at R = 1", grad_shafranov_residual(rho, z, flow, h), 1e-6))
    out = []
    for name, anchor, res, tol in entries:
        m = float(np.max(np.abs(res)))
        out.append({"name": name, "anchor": anchor, "max_abs_residual": m, "tolerance": tol,
                    "status": "pass" if m <= tol else "fail"})
    return out
