"""Newton-Okounkov bodies of graded semigroups and volume limits of graded linear series."""

from .errors import DocumentError, NokError
from .exactmath import Lattice, hnf, saturate, snf, subgroup_index
from .hull import RatPolytope, body_limit, convex_hull, nok_body, normalized_volume
from .limits import (
    MultiComponentSeries,
    decompose_reduced,
    degree_limit_report,
    multiplicity,
    restrict,
    sumset_report,
    volume_limit_report,
)
from .semigroup import GradedSemigroup, boundary_lattice, ind, level_index, q, strongly_nonnegative
from .series import NEG_INFINITY, GradedLinearSeries, Poly, nu

__all__ = [
    "DocumentError", "NokError", "Lattice", "hnf", "saturate", "snf", "subgroup_index",
    "RatPolytope", "body_limit", "convex_hull", "nok_body", "normalized_volume",
    "MultiComponentSeries", "decompose_reduced", "degree_limit_report", "multiplicity", "restrict",
    "sumset_report", "volume_limit_report", "GradedSemigroup", "boundary_lattice", "ind",
    "level_index", "q", "strongly_nonnegative", "NEG_INFINITY", "GradedLinearSeries", "Poly", "nu",
]
