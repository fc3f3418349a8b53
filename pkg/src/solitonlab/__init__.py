"""Weighted solitons, Fano cones and stability invariants for toric varieties."""

__version__ = "0.1.0"

from .errors import SolitonLabError  # noqa: E402
from .fanocone import build_fano_cone, conifold, msy_minimize, quotient, quotient_soliton, volume  # noqa: E402
from .nastab import PLFiltration, delta_estimate, na_eval, reduced_jna, valuation_report  # noqa: E402
from .polykernel import build_cone, build_polytope, integrate, moments, pushforward_1d, triangulate  # noqa: E402
from .solitons import futaki, solve_weight_vector  # noqa: E402
from .toricfunc import ToricPotential, functionals, geodesic, legendre, solve_gsoliton_1d  # noqa: E402
from .weights import make_weight, reeb_transform  # noqa: E402

__all__ = [
    "PLFiltration",
    "SolitonLabError",
    "ToricPotential",
    "build_cone",
    "build_fano_cone",
    "build_polytope",
    "conifold",
    "delta_estimate",
    "functionals",
    "futaki",
    "geodesic",
    "integrate",
    "legendre",
    "make_weight",
    "moments",
    "msy_minimize",
    "na_eval",
    "pushforward_1d",
    "quotient",
    "quotient_soliton",
    "reduced_jna",
    "reeb_transform",
    "solve_gsoliton_1d",
    "solve_weight_vector",
    "triangulate",
    "valuation_report",
    "volume",
]
