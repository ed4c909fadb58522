"""Toric scalar-flat Kähler metrics from moment-polytope data."""

from .polytope import (
    Edge,
    MomentPolytope,
    NutParameter,
    PolytopeConstants,
    compute_a_prime,
    derive_constants,
    load_polytope,
    normalize,
    validate,
)
from .ansatz import Ansatz, ChartPoint, GridSpec, build

__version__ = "0.1.0"
