"""Run configuration, the verification suite, and field-grid export."""

from __future__ import annotations

import csv
import logging
import math
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .alpha import (
    AlphaSolution,
    alpha_pde_residuals,
    ansatz_oracle,
    float_pde_residuals,
    slice_residuals,
    solve_alpha,
    verify_minimum,
)
from .field import Flow, bernoulli_residuals, field_report, standard_grid
from .localization import (
    BumpProfile,
    ConfigurationError,
    check_eps,
    integral_identity_check,
    localization_grid,
    make_bump,
    max_admissible_eps,
    sample_modulated,
    support_and_smoothness_report,
    support_scaling,
    total_mass_mpmath,
    verify_modulated_euler,
)
from .profiles import build_profiles, closed_form_profiles, eval_profiles, linear_part, verify_e2a, verify_e2b
from .psi import PsiSolution, integrate_psi, psi_ode_residual, solve_psi, verify_tv_transform
from .series import Series2D

log = logging.getLogger(__name__)

REFERENCE_PSI_STR = ["1/1", "-3/4", "9/128", "-21/1024", "1035/131072", "-1809/524288"]
ALPHA_CUBIC_JET = {(2, 0): 2, (0, 2): 2, (3, 0): 3, (1, 2): 3}
SQRT2_TOL = 0.05

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_INTERNAL = 0, 1, 2, 3


@dataclass
class RunConfig:
    order: int = 20
    R: float = 1.0
    R_loc: float = 2.0
    eps: float = 0.005
    half_width: float = 0.03
    grid: int = 41
    h: float = 1e-3
    h_loc: float = 2e-5
    loc_grid: int = 81
    radius: float = 0.1
    out: str | None = None
    seed: int = 0
    eps_scan: tuple[float, ...] = (0.02, 0.01, 0.005)

    def validate(self) -> None:
        for name in ("order", "R", "R_loc", "eps", "half_width", "grid", "h", "h_loc", "loc_grid", "radius"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        if self.order < 3:
            raise ConfigurationError("order must be at least 3")
        if self.half_width + 2 * self.h > self.radius:
            raise ConfigurationError(f"grid half-width {self.half_width} plus stencil exceeds radius {self.radius}")
        # cheap low-order chart so eps is rejected before the real pipeline runs
        probe = Flow(solve_alpha(order=min(self.order, 10), radius=self.radius), build_profiles(order=3).H, self.R_loc)
        limit = max_admissible_eps(probe)
        for e in (self.eps, *self.eps_scan):
            if not e <= limit:
                raise ConfigurationError(
                    f"eps = {e} exceeds max admissible {limit:.6g} for R = {self.R_loc}, radius {self.radius}")


def entry(name: str, anchor: str, residual: float, tolerance: float, passed: bool | None = None, **extra) -> dict:
    if passed is None:
        passed = residual <= tolerance
    return {"name": name, "anchor": anchor, "max_abs_residual": float(residual),
            "tolerance": tolerance, "status": "pass" if passed else "fail", **extra}


def skipped(name: str, anchor: str, reason: str) -> dict:
    return {"name": name, "anchor": anchor, "max_abs_residual": None, "tolerance": None,
            "status": "skipped", "reason": reason}


def psi_checks(cfg: RunConfig) -> tuple[PsiSolution, list[dict]]:
    sol = solve_psi(cfg.order, radius=cfg.radius)
    out = []
    if cfg.order >= 5:
        got = [f"{c.numerator}/{c.denominator}" for c in sol.series.coeffs[:6]]
        out.append(entry("psi_reference_coefficients", "reference Taylor coefficients of psi", 0.0, 0.0,
                         got == REFERENCE_PSI_STR, coefficients=got))
    else:
        out.append(skipped("psi_reference_coefficients", "reference Taylor coefficients of psi", "insufficient order"))
    res = psi_ode_residual(sol)
    out.append(entry("psi_ode_residual", "psi ODE", float(res.max_abs_coeff()), 0.0, res.is_zero(), degree=res.order))
    out.append(verify_tv_transform(sol))
    small = solve_psi(min(cfg.order, 5))
    out.append(entry("psi_prefix_stability", "psi recursion is order independent", 0.0, 0.0,
                     sol.series.coeffs[: small.order + 1] == small.series.coeffs))
    xs = np.linspace(0.02, cfg.radius, 9)
    dev = max(np.max(np.abs(sol.evaluate(xs) - integrate_psi(sol, xs, 0.01))),
              np.max(np.abs(sol.evaluate(-xs) - integrate_psi(sol, -xs, -0.01))))
    out.append(entry("psi_rk_crosscheck", "psi series against Runge-Kutta", dev, 1e-9, growth_rate=sol.growth_rate()))
    return sol, out


def profile_checks(psi: PsiSolution, order: int):
    p = build_profiles(psi, order)
    out = [verify_e2a(p), verify_e2b(p)]
    lin = (linear_part(p.F), linear_part(p.G), tuple(p.H.coeffs[:2]))
    expected = ((0, 4, 1.5), (0, 0, 8), (0, 4))
    out.append(entry("profile_jets", "dF/dx=4, dF/da=3/2, dG/dx=0, dG/da=8 at (1,0)", 0.0, 0.0,
                     lin == expected))
    return p, out


def alpha_checks(cfg: RunConfig, profiles) -> tuple[AlphaSolution, list[dict]]:
    sol = solve_alpha(profiles, cfg.order, radius=cfg.radius)
    s = sol.series
    out = []
    low = {(i, j): s.coeff(i, j) for i in range(4) for j in range(4) if i + j <= 3}
    ok = all(low[k] == ALPHA_CUBIC_JET.get(k, 0) for k in low)
    out.append(entry("alpha_cubic_jet", "alpha cubic jet 2X^2+2Y^2+3X^3+3XY^2", 0.0, 0.0, ok))
    out.append(entry("alpha_even_in_y", "alpha even in y", 0.0, 0.0, s.is_even_in(1), degree=s.order))
    out.append(verify_minimum(sol))
    r1, r2 = alpha_pde_residuals(sol, profiles)
    out.append(entry("alpha_pde_residual_first", "alpha solves the first-order system", float(r1.max_abs_coeff()), 0.0, r1.is_zero(), degree=r1.order))
    out.append(entry("alpha_pde_residual_second", "alpha solves the first-order system", float(r2.max_abs_coeff()), 0.0, r2.is_zero(), degree=r2.order))
    s1, s2 = slice_residuals(sol, profiles)
    out.append(entry("alpha_slice", "G(x, alpha(x,0)) = 0", float(max(s1.max_abs_coeff(), s2.max_abs_coeff())),
                     0.0, s1.is_zero() and s2.is_zero()))
    if cfg.order >= 5:
        oracle = ansatz_oracle(5)
        ok = all(s.coeff(*k) == v for k, v in oracle.items())
        out.append(entry("alpha_ansatz_oracle_deg4_5", "alpha solves the first-order system", 0.0, 0.0, ok))
    else:
        out.append(skipped("alpha_ansatz_oracle_deg4_5", "alpha solves the first-order system", "insufficient order"))
    rho, z = standard_grid(1.0, cfg.half_width, cfg.grid, exclude_circle=False)
    f1, f2 = float_pde_residuals(sol, profiles, rho, z)
    out.append(entry("alpha_float_residuals_grid", "alpha solves the first-order system", float(max(np.abs(f1).max(), np.abs(f2).max())), 1e-8))
    g = np.linspace(-cfg.radius, cfg.radius, 41)
    X, Y = np.meshgrid(g, g)
    c1, c2 = float_pde_residuals(sol, profiles, 1 + X.ravel(), Y.ravel())
    out.append(entry("alpha_chart_validity", "alpha solves the first-order system", float(max(np.abs(c1).max(), np.abs(c2).max())), 1e-8,
                     radius=cfg.radius))
    return sol, out


def field_checks(cfg: RunConfig, alpha: AlphaSolution, profiles) -> list[dict]:
    out = field_report(Flow(alpha, profiles.H, cfg.R), cfg.half_width, cfg.grid, cfg.h)
    # R -> lambda R: dimensionless bounds must not change
    worst = {}
    for lam in (0.5, 1.0, 2.0):
        for e in field_report(Flow(alpha, profiles.H, lam), cfg.half_width, cfg.grid, cfg.h):
            if e["name"] != "grad_shafranov":
                worst[e["name"]] = max(worst.get(e["name"], 0.0), e["max_abs_residual"] / e["tolerance"])
    rho, z = standard_grid(1.0, cfg.half_width, cfg.grid)
    p1 = Flow(alpha, profiles.H, 1.0).sample(rho, z).p
    p2 = Flow(alpha, profiles.H, 2.0).sample(2 * rho, 2 * z).p
    cov = float(np.max(np.abs(p2 - 16 * p1)) / np.max(p2))
    out.append(entry("scaling_covariance", "R scaling covariance", max(max(worst.values()), cov), 1.0,
                     max(worst.values()) <= 1 and cov <= 1e-12, pressure_scaling_rel=cov))
    return out


def localization_checks(cfg: RunConfig, alpha: AlphaSolution, profiles) -> list[dict]:
    flow = Flow(alpha, profiles.H, cfg.R_loc)
    check_eps(flow, cfg.eps)
    bump = make_bump(cfg.eps)
    out = []
    mm = total_mass_mpmath(cfg.eps)
    out.append(entry("bump_total_mass", "dp~ = omega^2 dp", abs(bump.total_mass - mm) / mm, 1e-10,
                     total_mass=bump.total_mass, interp_error=bump.interp_error))
    out.append(support_and_smoothness_report(flow, bump))
    out.extend(verify_modulated_euler(flow, bump, cfg.loc_grid, cfg.h_loc))
    sc = support_scaling(flow, cfg.eps_scan)
    dev = max(abs(r / math.sqrt(2) - 1) for r in sc["ratios"])
    out.append(entry("support_sqrt2_scaling", "support radius shrinks by sqrt(2) per halving of eps", dev, SQRT2_TOL, **sc))
    out.append(integral_identity_check(flow, bump))
    return out


def environment() -> dict:
    return {"python": sys.version.split()[0], "numpy": np.__version__, "platform": platform.platform(),
            "package_version": __version__}


def run_suite(cfg: RunConfig) -> dict:
    """Run every check in dependency order; raises only for configuration problems."""
    cfg.validate()
    t0 = time.perf_counter()
    entries: list[dict] = []
    stage = "psi"
    error = None
    try:
        psi, e = psi_checks(cfg)
        entries += e
        stage = "profiles"
        profiles, e = profile_checks(psi, cfg.order)
        entries += e
        stage = "alpha"
        alpha, e = alpha_checks(cfg, profiles)
        entries += e
        stage = "field"
        entries += field_checks(cfg, alpha, profiles)
        stage = "localization"
        entries += localization_checks(cfg, alpha, profiles)
    except ConfigurationError:
        raise
    except Exception as exc:  # report partial results with the failing stage
        log.exception("stage %s failed", stage)
        error = {"stage": stage, "type": type(exc).__name__, "message": str(exc)}
    statuses = [e["status"] for e in entries]
    overall = "error" if error else ("pass" if all(s != "fail" for s in statuses) else "fail")
    return {
        "status": overall,
        "entries": entries,
        "error": error,
        "config": {k: v for k, v in asdict(cfg).items()},
        "environment": environment(),
        "elapsed_s": time.perf_counter() - t0,
    }


def exit_code(report: dict) -> int:
    return {"pass": EXIT_OK, "fail": EXIT_FAIL, "error": EXIT_INTERNAL}[report["status"]]


# -- grid export -----------------------------------------------------------------------------------

CSV_HEADER = ["rho", "z", "u_rho", "u_phi", "u_z", "p", "u_rho_t", "u_phi_t", "u_z_t", "p_t"]


def grid_fields(flow: Flow, bump: BumpProfile, half_width: float, n: int) -> dict[str, np.ndarray]:
    """Raw and modulated fields on an n x n grid in (rho, z); arrays have shape (n, n)."""
    g = np.linspace(-half_width, half_width, n)
    X, Y = np.meshgrid(g, g, indexing="ij")
    rho, z = flow.R * (1 + X), flow.R * Y
    raw = flow.sample(rho, z)
    mod = sample_modulated(rho, z, flow, bump)
    return {"rho": rho, "z": z, "u_rho": raw.u_rho, "u_phi": raw.u_phi, "u_z": raw.u_z, "p": raw.p,
            "u_rho_t": mod.u_tilde[0], "u_phi_t": mod.u_tilde[1], "u_z_t": mod.u_tilde[2], "p_t": mod.p_tilde}


def write_csv(fields: dict[str, np.ndarray], path: Path) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        cols = [fields[k].ravel() for k in CSV_HEADER]
        for row in zip(*cols):
            w.writerow([repr(float(v)) for v in row])
    return path


def write_vtk(fields: dict[str, np.ndarray], path: Path, which: str) -> Path:
    """Legacy ASCII VTK structured grid in the meridional plane phi = 0."""
    suffix = "_t" if which == "modulated" else ""
    nx, ny = fields["rho"].shape
    rho = fields["rho"].ravel(order="F")
    z = fields["z"].ravel(order="F")
    comp = [fields[f"u_{c}{suffix}"].ravel(order="F") for c in ("rho", "phi", "z")]
    p = fields["p" + suffix].ravel(order="F")
    n = rho.size
    lines = ["# vtk DataFile Version 3.0", f"compact_euler {which} field", "ASCII",
             "DATASET STRUCTURED_GRID", f"DIMENSIONS {nx} {ny} 1", f"POINTS {n} double"]
    lines += [f"{r!r} 0.0 {zz!r}" for r, zz in zip(rho, z)]
    # at phi = 0, e_rho = e_x, e_phi = e_y, e_z = e_z
    lines += [f"POINT_DATA {n}", "VECTORS velocity double"]
    lines += [f"{a!r} {b!r} {c!r}" for a, b, c in zip(*comp)]
    lines += ["SCALARS pressure double 1", "LOOKUP_TABLE default"]
    lines += [repr(float(v)) for v in p]
    path.write_text("\n".join(lines) + "\n")
    return path


def export_grid(flow: Flow, bump: BumpProfile, out: str | os.PathLike, fmt: str = "csv",
                half_width: float | None = None, n: int = 41) -> list[Path]:
    if half_width is None:
        half_width = localization_grid(flow, bump, n)[2]
    fields = grid_fields(flow, bump, half_width, n)
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        return [write_csv(fields, out.with_suffix(".csv"))]
    if fmt == "vtk":
        stem = out.with_suffix("")
        return [write_vtk(fields, Path(f"{stem}_raw.vtk"), "raw"),
                write_vtk(fields, Path(f"{stem}_modulated.vtk"), "modulated")]
    raise ValueError(f"unknown format {fmt!r}")


def read_csv(path: str | os.PathLike) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = np.array([[float(v) for v in row] for row in r])
    return {k: rows[:, i] for i, k in enumerate(header)}


def verify_exported(path: str | os.PathLike, bump: BumpProfile, tol: float = 1e-10) -> dict:
    """Re-check ``|u~|^2 = 3 p omega(p)^2`` and zero u~ outside the support from file contents."""
    d = read_csv(path)
    sp_t = d["u_rho_t"] ** 2 + d["u_phi_t"] ** 2 + d["u_z_t"] ** 2
    w2 = np.asarray(bump.omega(d["p"])) ** 2
    dev = float(np.max(np.abs(sp_t - 3 * d["p"] * w2)))
    outside = w2 == 0
    zero_ok = bool(np.all(sp_t[outside] == 0))
    return entry("export_roundtrip", "u~ = omega(p) u", dev, tol, dev <= tol and zero_ok,
                 rows=int(len(sp_t)), in_support=int((~outside).sum()))
