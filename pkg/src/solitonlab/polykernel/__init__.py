"""Exact rational polytope and cone geometry with weighted integration."""

from .geometry import (
    Frame,
    LatticeVector,
    PolyCone,
    Polytope,
    Simplex,
    SimplicialCone,
    box,
    build_cone,
    build_polytope,
    cross_section,
    simplex_polytope,
    triangulate,
)
from .integrate import integrate, integrate_polys, lebesgue_integrals, moments, pushforward_1d
from .measure import Piece, PiecewiseMeasure

__all__ = [
    "Frame",
    "LatticeVector",
    "Piece",
    "PiecewiseMeasure",
    "PolyCone",
    "Polytope",
    "Simplex",
    "SimplicialCone",
    "box",
    "build_cone",
    "build_polytope",
    "cross_section",
    "integrate",
    "integrate_polys",
    "lebesgue_integrals",
    "moments",
    "pushforward_1d",
    "simplex_polytope",
    "triangulate",
]
