"""Command-line front end.

Exit codes: 0 all checks pass, 1 a verification failed, 2 configuration or
input error, 3 internal or solver error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction

from .alpha import AlphaSolverError, eval_alpha, solve_alpha
from .field import Flow, field_report
from .localization import ConfigurationError, check_eps, make_bump
from .profiles import build_profiles, verify_e2a, verify_e2b
from .psi import SolverDegeneracyError, solve_psi
from .report import (
    EXIT_CONFIG,
    EXIT_FAIL,
    EXIT_INTERNAL,
    EXIT_OK,
    RunConfig,
    exit_code,
    export_grid,
    localization_checks,
    run_suite,
)
from .series import DomainError, format_rational


class _Encoder(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, Fraction):
            return format_rational(o)
        if hasattr(o, "tolist"):
            return o.tolist()
        return super().default(o)


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2, cls=_Encoder)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _status(entries: list[dict]) -> int:
    return EXIT_OK if all(e["status"] != "fail" for e in entries) else EXIT_FAIL


def _summary(entries: list[dict]) -> None:
    for e in entries:
        res = e.get("max_abs_residual")
        res = "-" if res is None else f"{res:.3e}"
        print(f"{e['status'].upper():7s} {e['name']:36s} {res:>10s}  [{e['anchor']}]", file=sys.stderr)


def cmd_solve_psi(args) -> int:
    sol = solve_psi(args.order)
    if args.json:
        _emit({**sol.series.to_json(), "growth_rate": sol.growth_rate()}, args.out)
    else:
        for k, c in enumerate(sol.series.coeffs):
            print(f"{k} {format_rational(c)}")
    return EXIT_OK


def cmd_verify_lemma2(args) -> int:
    p = build_profiles(order=args.order)
    entries = [verify_e2a(p), verify_e2b(p)]
    _emit(entries, args.out)
    return _status(entries)


def cmd_solve_alpha(args) -> int:
    sol = solve_alpha(order=args.order, radius=args.radius)
    if args.json:
        _emit(sol.series.to_json(), args.out)
    else:
        for (i, j), c in sorted(sol.series.terms.items(), key=lambda t: (sum(t[0]), t[0])):
            print(f"{i} {j} {format_rational(c)}")
    return EXIT_OK


def cmd_eval_alpha(args) -> int:
    sol = solve_alpha(order=args.order, radius=args.radius)
    _emit({k: float(v) for k, v in eval_alpha(sol, args.x, args.y).items()}, args.out)
    return EXIT_OK


def cmd_verify_field(args) -> int:
    flow = Flow.build(args.order, args.R, args.radius)
    entries = field_report(flow, args.half_width, args.grid, args.h)
    _summary(entries)
    _emit(entries, args.out)
    return _status(entries)


def _loc_cfg(args) -> RunConfig:
    cfg = RunConfig(order=args.order, R_loc=args.R, eps=args.eps, radius=args.radius,
                    h_loc=args.h, loc_grid=args.grid, eps_scan=(args.eps,))
    return cfg


def cmd_localize(args) -> int:
    flow = Flow.build(args.order, args.R, args.radius)
    check_eps(flow, args.eps)
    bump = make_bump(args.eps)
    paths = export_grid(flow, bump, args.out or "localized.csv", args.format, args.half_width, args.grid)
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_verify_localized(args) -> int:
    cfg = _loc_cfg(args)
    cfg.eps_scan = tuple(args.eps_scan)
    flow = Flow.build(args.order, args.R, args.radius)
    check_eps(flow, args.eps)
    profiles = build_profiles(order=args.order)
    entries = localization_checks(cfg, flow.alpha, profiles)
    _summary(entries)
    _emit(entries, args.out)
    return _status(entries)


def cmd_verify_all(args) -> int:
    cfg = RunConfig(order=args.order, R=args.R, eps=args.eps, grid=args.grid, h=args.h,
                    radius=args.radius, out=args.out, half_width=args.half_width)
    report = run_suite(cfg)
    _summary(report["entries"])
    print(f"overall: {report['status']} ({report['elapsed_s']:.1f} s)", file=sys.stderr)
    _emit(report, args.out)
    return exit_code(report)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="compact-euler", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--order", type=int, default=20)
    common.add_argument("--radius", type=float, default=0.1, help="chart radius in units of R")
    common.add_argument("--out", default=None, help="output path (stdout if omitted)")
    common.add_argument("--json", action="store_true")

    p = sub.add_parser("solve-psi", parents=[common], help="exact psi coefficients")
    p.set_defaults(func=cmd_solve_psi)
    p = sub.add_parser("verify-lemma2", parents=[common], help="exact residuals of the F and G profile identities")
    p.set_defaults(func=cmd_verify_lemma2)
    p = sub.add_parser("solve-alpha", parents=[common], help="alpha coefficient table")
    p.set_defaults(func=cmd_solve_alpha)
    p = sub.add_parser("eval-alpha", parents=[common], help="alpha and derivatives at a point")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, required=True)
    p.set_defaults(func=cmd_eval_alpha)

    def grid_args(p, R, grid, h, half_width):
        p.add_argument("--R", type=float, default=R)
        p.add_argument("--grid", type=int, default=grid, help="points per side")
        p.add_argument("--h", type=float, default=h, help="finite-difference step in units of R")
        p.add_argument("--half-width", type=float, default=half_width, help="grid half-width in units of R")

    p = sub.add_parser("verify-field", parents=[common], help="Euler, divergence, Bernoulli, Grad-Shafranov checks")
    grid_args(p, 1.0, 41, 1e-3, 0.03)
    p.set_defaults(func=cmd_verify_field)

    for name, func, help_ in (("localize", cmd_localize, "write the modulated field grid"),
                              ("export-grid", cmd_localize, "write raw and modulated field grids")):
        p = sub.add_parser(name, parents=[common], help=help_)
        grid_args(p, 2.0, 41, 2e-5, None)
        p.add_argument("--eps", type=float, default=0.005)
        p.add_argument("--format", choices=("csv", "vtk"), default="csv")
        p.set_defaults(func=func)

    p = sub.add_parser("verify-localized", parents=[common], help="compact-support and integral checks")
    grid_args(p, 2.0, 81, 2e-5, None)
    p.add_argument("--eps", type=float, default=0.005)
    p.add_argument("--eps-scan", type=float, nargs="+", default=[0.02, 0.01, 0.005])
    p.set_defaults(func=cmd_verify_localized)

    p = sub.add_parser("verify-all", parents=[common], help="run the full verification suite")
    grid_args(p, 1.0, 41, 1e-3, 0.03)
    p.add_argument("--eps", type=float, default=0.005)
    p.set_defaults(func=cmd_verify_all)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigurationError, DomainError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverDegeneracyError, AlphaSolverError, RuntimeError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
