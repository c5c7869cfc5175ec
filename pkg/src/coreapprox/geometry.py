"""Convex hulls of core vertices in the efficiency hyperplane.

Core allocations satisfy ``sum(x) = v(N)``, so hulls are built in the affine
chart that drops the last coordinate. Volumes are chart volumes; ratios of
volumes taken in the same chart do not depend on the chart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from .errors import ContractError

CHART = "drop-last-coordinate"
EFFICIENCY_TOL = 1e-6
AFFINE_TOL = 1e-10
FACET_TOL = 1e-8
MEMBERSHIP_TOL = 1e-8


def _as_points(points) -> np.ndarray:
    pts = getattr(points, "points", points)
    pts = np.asarray(pts, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[None, :]
    return pts


def project(points, total: float | None = None) -> np.ndarray:
    """Drop the last coordinate of points lying on ``sum(x) = total``.

    When ``total`` is omitted, the first point's coordinate sum is used and
    every other point must agree with it.
    """
    pts = _as_points(points)
    if len(pts) == 0:
        return pts[:, :-1].copy() if pts.ndim == 2 else np.empty((0, 0))
    sums = pts.sum(axis=1)
    ref = sums[0] if total is None else float(total)
    bad = np.abs(sums - ref) > EFFICIENCY_TOL * max(1.0, abs(ref))
    if bad.any():
        raise ContractError(
            f"{int(bad.sum())} point(s) are off the efficiency hyperplane sum(x) = {ref}"
        )
    return pts[:, :-1].copy()


def unproject(projected, total: float) -> np.ndarray:
    proj = _as_points(projected)
    last = total - proj.sum(axis=1, keepdims=True)
    return np.hstack([proj, last])


def affine_dimension(points) -> int:
    pts = _as_points(points)
    if len(pts) <= 1:
        return 0
    diffs = pts[1:] - pts[0]
    if diffs.shape[1] == 0:
        return 0
    s = np.linalg.svd(diffs, compute_uv=False)
    scale = max(1.0, float(np.abs(pts).max()))
    return int((s > AFFINE_TOL * scale * max(diffs.shape)).sum())


@dataclass
class Polytope:
    """Convex hull of a finite point set in the projected chart.

    ``facets`` holds rows ``(normal, offset)`` with ``normal . y + offset <= 0``
    inside; ``triangulation`` indexes into ``vertices``.
    """

    proj_dim: int
    vertices: np.ndarray = field(repr=False)
    facets: np.ndarray = field(repr=False)
    triangulation: np.ndarray = field(repr=False)
    affine_dim: int
    total: float | None = None

    @property
    def ambient_n(self) -> int:
        return self.proj_dim + 1

    @property
    def degenerate(self) -> bool:
        return self.affine_dim < self.proj_dim or len(self.vertices) == 0

    @property
    def empty(self) -> bool:
        return len(self.vertices) == 0

    def simplex_volumes(self) -> np.ndarray:
        if len(self.triangulation) == 0:
            return np.zeros(0)
        simp = self.vertices[self.triangulation]
        edges = simp[:, 1:, :] - simp[:, :1, :]
        return np.abs(np.linalg.det(edges)) / math.factorial(self.proj_dim)

    def to_dict(self, volume_value=None) -> dict:
        return {
            "chart": CHART,
            "proj_dim": self.proj_dim,
            "affine_dim": self.affine_dim,
            "degenerate": self.degenerate,
            "vertices": self.vertices.tolist(),
            "facet_normals": self.facets[:, :-1].tolist() if len(self.facets) else [],
            "facet_offsets": self.facets[:, -1].tolist() if len(self.facets) else [],
            "volume": volume_value,
        }


class DegenerateVolume(float):
    """A zero volume that remembers it came from a lower-dimensional set."""

    degenerate = True

    def __new__(cls):
        return super().__new__(cls, 0.0)

    def __repr__(self):
        return "DEGENERATE"


DEGENERATE = DegenerateVolume()


def _hull_1d(proj):
    lo, hi = int(np.argmin(proj[:, 0])), int(np.argmax(proj[:, 0]))
    verts = proj[[lo, hi]]
    facets = np.array([[-1.0, verts[0, 0]], [1.0, -verts[1, 0]]])
    return verts, facets, np.array([[0, 1]])


def _pulling_triangulation(verts, simplices):
    """Cone every facet simplex not containing vertex 0 to vertex 0."""
    keep = ~(simplices == 0).any(axis=1)
    tri = np.hstack([np.zeros((keep.sum(), 1), dtype=int), simplices[keep]])
    if len(tri) == 0:
        return tri
    simp = verts[tri]
    vol = np.abs(np.linalg.det(simp[:, 1:, :] - simp[:, :1, :]))
    return tri[vol > 1e-14 * max(1.0, float(np.abs(verts).max())) ** verts.shape[1]]


def convex_hull(points, total: float | None = None, projected: bool = False) -> Polytope:
    """Hull of core points (original coordinates unless ``projected``).

    Lower-dimensional inputs give a polytope flagged ``degenerate`` with no
    facets or triangulation; an empty input gives the empty polytope.
    """
    pts = _as_points(points)
    if pts.size == 0:
        dim = pts.shape[1] - (0 if projected else 1) if pts.ndim == 2 else 0
        return Polytope(max(dim, 0), np.empty((0, max(dim, 0))), np.empty((0, dim + 1)),
                        np.empty((0, dim + 1), dtype=int), -1, total)
    if not projected:
        total = float(pts[0].sum()) if total is None else total
        pts = project(pts, total)
    d = pts.shape[1]
    adim = affine_dimension(pts)
    if adim < d or d == 0:
        # keep only distinct points; extreme-point pruning needs full dimension
        _, first = np.unique(np.round(pts, 12), axis=0, return_index=True)
        uniq = pts[np.sort(first)]
        return Polytope(d, uniq, np.empty((0, d + 1)), np.empty((0, d + 1), dtype=int),
                        adim, total)
    if d == 1:
        verts, facets, tri = _hull_1d(pts)
        return Polytope(d, verts, facets, tri, adim, total)
    try:
        hull = ConvexHull(pts)
    except QhullError:
        hull = ConvexHull(pts, qhull_options="QJ")
    verts = pts[hull.vertices]
    remap = np.full(len(pts), -1)
    remap[hull.vertices] = np.arange(len(hull.vertices))
    simplices = remap[hull.simplices]
    facets = _merge_facets(hull.equations)
    tri = _pulling_triangulation(verts, simplices)
    return Polytope(d, verts, facets, tri, adim, total)


def _merge_facets(equations):
    """Collapse coplanar triangulated facets into unique half-spaces."""
    if len(equations) == 0:
        return equations
    key = np.round(equations, 9)
    _, idx = np.unique(key, axis=0, return_index=True)
    return equations[np.sort(idx)]


def volume(poly: Polytope) -> float:
    """Chart volume as the sum of triangulation simplex volumes.

    Returns :data:`DEGENERATE` (a zero that is flagged) for lower-dimensional
    or empty polytopes.
    """
    if poly.degenerate:
        return DEGENERATE
    return float(poly.simplex_volumes().sum())


def centroid(points) -> np.ndarray:
    pts = _as_points(points)
    if len(pts) == 0:
        raise ContractError("the centroid of an empty vertex set is undefined")
    return pts.mean(axis=0)


def contains(points, x, tol: float = MEMBERSHIP_TOL) -> bool:
    """True iff ``x`` is a convex combination of ``points``.

    Solves ``min |P^T w - x|_1`` over the simplex ``w >= 0, sum(w) = 1`` and
    accepts when the residual is at most ``tol * max(1, |x|_inf)``.
    """
    pts = _as_points(points)
    x = np.asarray(x, dtype=np.float64)
    if len(pts) == 0:
        raise ContractError("membership query against an empty vertex set")
    m, n = pts.shape
    scale = max(1.0, float(np.abs(x).max()), float(np.abs(pts).max()))
    # variables: w (m), p (n), q (n); P^T w + p - q = x
    a_eq = np.zeros((n + 1, m + 2 * n))
    a_eq[:n, :m] = pts.T
    a_eq[:n, m:m + n] = np.eye(n)
    a_eq[:n, m + n:] = -np.eye(n)
    a_eq[n, :m] = 1.0
    b_eq = np.append(x, 1.0)
    cost = np.concatenate([np.zeros(m), np.ones(2 * n)])
    res = linprog(cost, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs",
                  options={"primal_feasibility_tolerance": 1e-10,
                           "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        return False
    w = np.clip(res.x[:m], 0.0, None)
    w /= w.sum()
    resid = np.abs(pts.T @ w - x).max()
    return bool(resid <= tol * scale)


def facet_contains(poly: Polytope, y, tol: float = FACET_TOL) -> bool:
    """Facet test for a projected point against a full-dimensional hull."""
    if poly.degenerate:
        raise ContractError("facet test needs a full-dimensional polytope")
    y = np.asarray(y, dtype=np.float64)
    return bool((poly.facets[:, :-1] @ y + poly.facets[:, -1] <= tol).all())
