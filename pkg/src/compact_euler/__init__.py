"""Exact-series construction and numerical verification of a compactly supported
steady axisymmetric Euler flow."""

__version__ = "0.1.0"

from .series import Series1D, Series2D, compose_1d_into_2d  # noqa: E402
from .psi import PsiSolution, solve_psi  # noqa: E402
from .profiles import ProfileSet, build_profiles  # noqa: E402
from .alpha import AlphaSolution, solve_alpha  # noqa: E402
from .field import Flow, FieldSample  # noqa: E402
from .localization import BumpProfile, make_bump, sample_modulated  # noqa: E402

__all__ = [
    "Series1D", "Series2D", "compose_1d_into_2d", "PsiSolution", "solve_psi", "ProfileSet",
    "build_profiles", "AlphaSolution", "solve_alpha", "Flow", "FieldSample", "BumpProfile",
    "make_bump", "sample_modulated",
]
