"""Pressure modulation ``u~ = omega(p) u`` and its compact-support verification.

Because ``u . grad p = 0``, any smooth ``omega`` gives another steady Euler flow
with pressure ``dp~ = omega(p)^2 dp``. Taking ``supp omega = [eps, 2 eps]``
confines the flow to a thin solid torus around the circle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .field import FieldSample, Flow, euler_residual, divergence


class ConfigurationError(ValueError):
    """Parameters are inconsistent with the validated chart."""


class QuadratureError(RuntimeError):
    """A quadrature failed to converge; carries the refinement trace."""

    def __init__(self, message: str, trace: list):
        super().__init__(message)
        self.trace = trace


def _omega(s, eps: float):
    """``exp(-eps^2 / ((s - eps)(2 eps - s)))`` on ``(eps, 2 eps)``, zero elsewhere."""
    s = np.asarray(s, dtype=float)
    g = (s - eps) * (2 * eps - s)
    inside = g > 0
    with np.errstate(divide="ignore", over="ignore"):
        out = np.where(inside, np.exp(-(eps**2) / np.where(inside, g, 1.0)), 0.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class BumpProfile:
    eps: float
    total_mass: float
    _spline: CubicHermiteSpline = field(repr=False, compare=False)
    interp_error: float = 0.0

    def omega(self, s):
        return _omega(s, self.eps)

    def omega_sq(self, s):
        return np.asarray(self.omega(s)) ** 2

    def omega_sq_antideriv(self, c):
        """``int_0^c omega^2``."""
        c = np.asarray(c, dtype=float)
        cc = np.clip(c, self.eps, 2 * self.eps)
        out = np.where(c <= self.eps, 0.0, np.where(c >= 2 * self.eps, self.total_mass, self._spline(cc)))
        return out if out.ndim else float(out)

    def p_tilde(self, c):
        """Modulated pressure as a function of the original one; zero for ``c >= 2 eps``."""
        out = np.asarray(self.omega_sq_antideriv(c)) - self.total_mass
        return out if out.ndim else float(out)


def _mass_quad(eps: float, a: float, b: float) -> float:
    val, _ = quad(lambda s: _omega(s, eps) ** 2, a, b, epsabs=0, epsrel=1e-13, limit=200)
    return val


def total_mass_mpmath(eps: float) -> float:
    """Tanh-sinh cross-check of ``int omega^2`` (independent of scipy's QUADPACK)."""
    mpmath.mp.dps = 30
    e = mpmath.mpf(eps)
    f = lambda s: mpmath.exp(-2 * e**2 / ((s - e) * (2 * e - s)))
    return float(mpmath.quad(f, [e, 1.5 * e, 2 * e]))


def make_bump(eps: float, n_nodes: int = 801) -> BumpProfile:
    if not eps > 0:
        raise ConfigurationError("eps must be positive")
    nodes = np.linspace(eps, 2 * eps, n_nodes)
    pieces = [_mass_quad(eps, a, b) for a, b in zip(nodes[:-1], nodes[1:])]
    cum = np.concatenate([[0.0], np.cumsum(pieces)])
    spline = CubicHermiteSpline(nodes, cum, _omega(nodes, eps) ** 2)
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    check_at = mids[:: max(1, len(mids) // 50)]
    exact = np.array([_mass_quad(eps, eps, m) for m in check_at])
    err = float(np.max(np.abs(spline(check_at) - exact)))
    return BumpProfile(eps, float(cum[-1]), spline, err)


def p_boundary_min(flow: Flow, n: int = 2001) -> float:
    """Smallest pressure on the boundary of the chart square."""
    r = flow.chart_radius
    t = np.linspace(-r, r, n)
    X = np.concatenate([t, t, np.full(n, r), np.full(n, -r)])
    Y = np.concatenate([np.full(n, r), np.full(n, -r), t, t])
    a = flow.alpha.value(1 + X, Y)
    return float(np.min(a)) * flow.R**4 / 4


def max_admissible_eps(flow: Flow, margin: float = 0.9) -> float:
    """Largest eps whose outer shell ``p = 2 eps`` closes well inside the chart."""
    return margin * p_boundary_min(flow) / 2


def check_eps(flow: Flow, eps: float) -> None:
    limit = max_admissible_eps(flow)
    if not 0 < eps <= limit:
        raise ConfigurationError(f"eps = {eps} outside (0, {limit:.6g}] for R = {flow.R} and chart radius {flow.chart_radius}")


@dataclass
class ModulatedSample:
    u_tilde: tuple[np.ndarray, np.ndarray, np.ndarray]
    p_tilde: np.ndarray
    inside_support: np.ndarray
    p: np.ndarray
    omega: np.ndarray

    def as_field(self) -> FieldSample:
        u_r, u_p, u_z = self.u_tilde
        return FieldSample(u_r, u_p, u_z, self.p_tilde, np.full_like(self.p, np.nan), np.zeros_like(self.p))


def sample_modulated(rho, z, flow: Flow, bump: BumpProfile) -> ModulatedSample:
    """Defined on all of the half-plane rho > 0; zero extension outside the chart."""
    rho, z = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(z, dtype=float))
    shape = rho.shape
    rho, z = rho.ravel(), z.ravel()
    inside = flow.in_chart(rho, z) & (rho > 0)
    u_r = np.zeros_like(rho)
    u_p = np.zeros_like(rho)
    u_z = np.zeros_like(rho)
    p = np.full_like(rho, np.inf)
    p_t = np.zeros_like(rho)
    om = np.zeros_like(rho)
    if np.any(inside):
        s = flow.sample(rho[inside], z[inside])
        w = np.asarray(bump.omega(s.p))
        u_r[inside] = w * s.u_rho
        u_p[inside] = w * s.u_phi
        u_z[inside] = w * s.u_z
        p[inside] = s.p
        p_t[inside] = bump.p_tilde(s.p)
        om[inside] = w
    supp = om > 0
    return ModulatedSample(
        (u_r.reshape(shape), u_p.reshape(shape), u_z.reshape(shape)),
        p_t.reshape(shape), supp.reshape(shape), p.reshape(shape), om.reshape(shape),
    )


def modulated_sampler(flow: Flow, bump: BumpProfile):
    return lambda rho, z: sample_modulated(rho, z, flow, bump).as_field()


# -- support geometry ------------------------------------------------------------------------------


def level_radius(flow: Flow, c: float, theta, r_max: float | None = None) -> np.ndarray:
    """Distance from (1, 0) in the (x, y) plane to the level set ``alpha = c`` along each angle."""
    r_max = r_max if r_max is not None else flow.chart_radius
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    out = np.empty_like(theta)
    for k, th in enumerate(theta):
        ct, st = math.cos(th), math.sin(th)
        f = lambda r: flow.alpha.value(1 + r * ct, r * st) - c
        out[k] = brentq(f, 0.0, r_max * 0.999, xtol=1e-15, rtol=1e-14)
    return out


def support_radii(flow: Flow, bump: BumpProfile, n_theta: int = 256):
    """Inner (p = eps) and outer (p = 2 eps) boundary radii, in units of R."""
    theta = np.linspace(0, 2 * np.pi, n_theta, endpoint=False)
    scale = 4 / flow.R**4
    inner = level_radius(flow, bump.eps * scale, theta)
    outer = level_radius(flow, 2 * bump.eps * scale, theta)
    return theta, inner, outer


def measured_support_radius(flow: Flow, bump: BumpProfile) -> float:
    """Half-width r of the smallest square ``|x - 1|, |y| <= r`` containing the support."""
    theta, _, outer = support_radii(flow, bump, 720)
    return float(np.max(np.maximum(np.abs(outer * np.cos(theta)), np.abs(outer * np.sin(theta)))))


def _polar_points(flow: Flow, theta: np.ndarray, r: np.ndarray):
    return flow.R * (1 + r * np.cos(theta)), flow.R * r * np.sin(theta)


def support_and_smoothness_report(flow: Flow, bump: BumpProfile, n_theta: int = 64, h: float | None = None) -> dict:
    theta, inner, outer = support_radii(flow, bump, n_theta)
    # strictly outside the torus: beyond the outer shell, inside the core, and far away
    zero_max = 0.0
    nz_min = np.inf
    for frac in (1.02, 1.2, 1.5):
        r = np.minimum(outer * frac, flow.chart_radius)
        s = sample_modulated(*_polar_points(flow, theta, r), flow, bump)
        zero_max = max(zero_max, float(np.max(np.abs(np.stack(s.u_tilde)))))
    for frac in (0.98, 0.5, 0.0):
        s = sample_modulated(*_polar_points(flow, theta, inner * frac), flow, bump)
        zero_max = max(zero_max, float(np.max(np.abs(np.stack(s.u_tilde)))))
    far = sample_modulated(np.array([10 * flow.R, 0.5 * flow.R, flow.R]), np.array([0.0, 0.0, 3 * flow.R]), flow, bump)
    zero_max = max(zero_max, float(np.max(np.abs(np.stack(far.u_tilde)))))
    mid = sample_modulated(*_polar_points(flow, theta, 0.5 * (inner + outer)), flow, bump)
    nz_min = float(np.min(np.sqrt(sum(c**2 for c in mid.u_tilde))))

    # derivatives along a ray decay to zero approaching each support boundary
    h = h if h is not None else 1e-4 * flow.R
    decay = {}
    sampler = modulated_sampler(flow, bump)
    for label, r_b, sign in (("inner", inner[0], +1), ("outer", outer[0], -1)):
        width = outer[0] - inner[0]
        deltas = width * np.array([0.2, 0.1, 0.05, 0.025])
        d1, d2 = [], []
        for dl in deltas:
            rho = flow.R * (1 + r_b + sign * dl)
            f = lambda rr: sampler(np.asarray(rr), np.asarray(0.0)).u_phi
            hh = min(h, 0.25 * dl * flow.R)
            d1.append(abs(float((f(rho + hh) - f(rho - hh)) / (2 * hh))))
            d2.append(abs(float((f(rho + hh) - 2 * f(rho) + f(rho - hh)) / hh**2)))
        decay[label] = {"deltas": deltas.tolist(), "d1": d1, "d2": d2}
    monotone = all(
        all(np.diff(decay[k][m]) <= 0) for k in decay for m in ("d1", "d2")
    )
    tends_to_zero = all(decay[k][m][-1] < 1e-3 * max(decay[k][m][0], 1e-300) for k in decay for m in ("d1", "d2"))
    box = measured_support_radius(flow, bump)
    ok = zero_max == 0.0 and nz_min > 0 and monotone and tends_to_zero
    return {
        "name": "support_and_smoothness",
        "anchor": "supp(omega) in [eps, 2eps]",
        "eps": bump.eps,
        "support_box_half_width": box,
        "inner_radius_range": [float(inner.min()), float(inner.max())],
        "outer_radius_range": [float(outer.min()), float(outer.max())],
        "max_abs_u_tilde_outside": zero_max,
        "min_speed_mid_shell": nz_min,
        "boundary_derivative_decay": decay,
        "max_abs_residual": zero_max,
        "tolerance": 0.0,
        "status": "pass" if ok else "fail",
    }


def support_scaling(flow: Flow, eps_values=(0.02, 0.01, 0.005)) -> dict:
    """Measured support radius per eps; successive halvings should shrink it by ~sqrt(2)."""
    radii = [measured_support_radius(flow, make_bump(e, n_nodes=101)) for e in eps_values]
    ratios = [radii[k] / radii[k + 1] for k in range(len(radii) - 1)]
    return {"eps": list(eps_values), "radius": radii, "ratios": ratios}


# -- modulated Euler check -------------------------------------------------------------------------


def localization_grid(flow: Flow, bump: BumpProfile, n: int = 81, pad: float = 1.25):
    """Square grid (units of R) around the circle just covering the support."""
    half = min(pad * measured_support_radius(flow, bump), 0.95 * flow.chart_radius)
    g = np.linspace(-half, half, n)
    X, Y = np.meshgrid(g, g, indexing="ij")
    return flow.R * (1 + X.ravel()), flow.R * Y.ravel(), half


def verify_modulated_euler(flow: Flow, bump: BumpProfile, n: int = 81, h: float = 1e-3) -> list[dict]:
    rho, z, half = localization_grid(flow, bump, n)
    sampler = modulated_sampler(flow, bump)
    hh = h * flow.R
    r_rho, r_phi, r_z = euler_residual(rho, z, flow, hh, sampler=sampler)
    div = divergence(rho, z, flow, hh, sampler=sampler)
    # stencils that straddle a support boundary
    eps = bump.eps
    ps = [sample_modulated(rho + k * hh, z, flow, bump).p for k in (-2, 2)]
    ps += [sample_modulated(rho, z + k * hh, flow, bump).p for k in (-2, 2)]
    ps = np.stack(ps)
    straddle = ((ps.min(0) < eps) & (ps.max(0) > eps)) | ((ps.min(0) < 2 * eps) & (ps.max(0) > 2 * eps))
    R = flow.R
    mom = max(np.abs(r_rho).max(), np.abs(r_phi).max(), np.abs(r_z).max()) / R**3
    entries = [
        ("modulated_euler", "(u~.grad)u~ = -grad p~", float(mom), 1e-6),
        ("modulated_divergence", "div u~ = 0", float(np.abs(div).max() / R), 1e-6),
        ("modulated_divergence_straddling", "div u~ = 0",
         float(np.abs(div[straddle]).max() / R) if straddle.any() else float("nan"), 1e-8),
    ]
    out = []
    for name, anchor, m, tol in entries:
        out.append({"name": name, "anchor": anchor, "max_abs_residual": m, "tolerance": tol,
                    "status": "pass" if m <= tol else "fail",
                    "straddling_stencils": int(straddle.sum()), "grid_half_width": half})
    return out


# -- integral identities ---------------------------------------------------------------------------


def sublevel_volume(flow: Flow, c, n_theta: int = 256) -> np.ndarray:
    """``V(c) = Vol{p <= c}`` from polar level-set radii."""
    c = np.atleast_1d(np.asarray(c, dtype=float))
    theta = np.linspace(0, 2 * np.pi, n_theta, endpoint=False)
    R = flow.R
    out = []
    for ck in c:
        r = level_radius(flow, 4 * ck / R**4, theta)
        # 2 pi rho dA with rho = R (1 + r cos t), dA = R^2 r dr dt
        inner = r**2 / 2 + np.cos(theta) * r**3 / 3
        out.append(2 * np.pi * R**3 * np.mean(inner) * 2 * np.pi)
    return np.array(out)


def sublevel_volume_indicator(flow: Flow, c: float, n: int = 801) -> float:
    """Cross-check of ``V(c)`` by midpoint quadrature of the indicator function."""
    r = level_radius(flow, 4 * c / flow.R**4, np.linspace(0, 2 * np.pi, 64, endpoint=False)).max() * 1.05
    edges = np.linspace(-r, r, n + 1)
    m = 0.5 * (edges[1:] + edges[:-1])
    X, Y = np.meshgrid(m, m, indexing="ij")
    a = flow.alpha.value(1 + X, Y)
    dA = (edges[1] - edges[0]) ** 2 * flow.R**2
    return float(2 * np.pi * np.sum((a * flow.R**4 / 4 <= c) * flow.R * (1 + X)) * dA)


def energy_integrals(flow: Flow, bump: BumpProfile, n: int) -> tuple[float, float]:
    """Trapezoid values of ``int |u~|^2 dV`` and ``int 3 p~ dV`` on an n x n grid."""
    half = min(1.1 * measured_support_radius(flow, bump), flow.chart_radius)
    g = np.linspace(-half, half, n)
    X, Y = np.meshgrid(g, g, indexing="ij")
    rho, z = flow.R * (1 + X), flow.R * Y
    s = sample_modulated(rho, z, flow, bump)
    sp = sum(c**2 for c in s.u_tilde)
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    W = np.outer(w, w) * (flow.R * (g[1] - g[0])) ** 2
    e = float(np.sum(W * 2 * np.pi * rho * sp))
    q = float(np.sum(W * 2 * np.pi * rho * 3 * s.p_tilde))
    return e, q


def integral_identity_check(flow: Flow, bump: BumpProfile, sizes=(41, 81, 161, 321), n_c: int = 9) -> dict:
    trace = []
    for n in sizes:
        e, q = energy_integrals(flow, bump, n)
        trace.append({"n": n, "energy": e, "pressure_term": q, "I": e + q})
    energy = trace[-1]["energy"]
    if not energy > 0:
        raise QuadratureError("modulated energy vanished; support not resolved", trace)
    rel = [abs(t["I"]) / t["energy"] for t in trace]
    floor = 1e-12
    orders = [math.log2(rel[k] / rel[k + 1]) for k in range(len(rel) - 1) if rel[k + 1] > floor]
    converged = rel[-1] <= 1e-3 and (all(o >= 2 for o in orders) or rel[-1] <= floor)
    if not converged and rel[-1] > 1e-3:
        raise QuadratureError(f"|I|/E = {rel[-1]:.3e} did not converge", trace)

    eps = bump.eps
    cs = np.geomspace(eps / 4, 2 * eps, n_c)
    V = sublevel_volume(flow, cs)
    ratio = V / cs
    spread = float((ratio.max() - ratio.min()) / ratio.mean())
    small = sublevel_volume(flow, np.array([eps * 1e-3]))[0]
    return {
        "name": "integral_identities",
        "anchor": "int(|u~|^2 + 3p~) = 0 and V(p)/p constant",
        "relative_I": rel[-1],
        "refinement": trace,
        "observed_orders": orders,
        "V_over_c": ratio.tolist(),
        "c_values": cs.tolist(),
        "V_over_c_spread": spread,
        "V_small_c": float(small),
        "max_abs_residual": max(rel[-1], spread),
        "tolerance": 1e-3,
        "status": "pass" if converged and spread <= 1e-2 else "fail",
    }
