"""Curvature and hypersurface geometry of Siklos spacetimes.

The metric is g = (beta^2 / x3^2)(2 dx1 dx2 + H dx2^2 + dx3^2 + dx4^2) on the
chart x3 > 0, with H = H(x2, x3, x4) given as an expression string.
"""

from .ambient import (
    AmbientGeometry,
    DefiningFunction,
    christoffel_closed,
    christoffel_koszul,
    f_helpers,
    integrate_geodesic,
    predicates,
    riemann_closed,
    riemann_from_gamma,
    sectional_curvature,
)
from .catalog import catalog_list, get_entry, preset_H
from .errors import SiklosError
from .exprparse import parse
from .hypersurface import Immersion, classify, extrinsic_at, gauss_codazzi_residuals
from .jets import Jet2
from .verify import VerificationConfig, report_to_json, run_suite

__version__ = "0.1.0"

__all__ = [
    "AmbientGeometry",
    "DefiningFunction",
    "Immersion",
    "Jet2",
    "SiklosError",
    "VerificationConfig",
    "catalog_list",
    "christoffel_closed",
    "christoffel_koszul",
    "classify",
    "extrinsic_at",
    "f_helpers",
    "gauss_codazzi_residuals",
    "get_entry",
    "integrate_geodesic",
    "parse",
    "predicates",
    "preset_H",
    "report_to_json",
    "riemann_closed",
    "riemann_from_gamma",
    "run_suite",
    "sectional_curvature",
]
