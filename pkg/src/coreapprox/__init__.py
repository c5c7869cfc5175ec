"""Approximate the core of TU-games by sampling LP vertices."""

from .approx import (ApproxResult, VertexSet, approximate_core, dedup_insert,
                     verify_vertex)
from .directions import DirectionScheme, SchemeKind
from .games import (MuseumMatrix, SavingsParams, TUGame, coalition_value, load_game,
                    make_additive_game, make_museum_game, make_nonconvex_game,
                    make_savings_game, make_unanimity_game, save_game, shapley_value)
from .geometry import Polytope, centroid, contains, convex_hull, project, unproject, volume
from .lp import INFEASIBLE, Basis, CoreLPSolver, build_core_lp, check_nonempty, solve_vertex
from .metrics import MetricsReport, epr, rdc, vr
from .oracle import enumerate_vertices_naive, exact_core_membership, saturation_reference

__version__ = "0.1.0"

__all__ = [
    "ApproxResult", "VertexSet", "approximate_core", "dedup_insert", "verify_vertex",
    "DirectionScheme", "SchemeKind",
    "MuseumMatrix", "SavingsParams", "TUGame", "coalition_value", "load_game",
    "make_additive_game", "make_museum_game", "make_nonconvex_game", "make_savings_game",
    "make_unanimity_game", "save_game", "shapley_value",
    "Polytope", "centroid", "contains", "convex_hull", "project", "unproject", "volume",
    "INFEASIBLE", "Basis", "CoreLPSolver", "build_core_lp", "check_nonempty", "solve_vertex",
    "MetricsReport", "epr", "rdc", "vr",
    "enumerate_vertices_naive", "exact_core_membership", "saturation_reference",
]
