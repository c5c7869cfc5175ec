import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coreapprox.errors import ContractError
from coreapprox.geometry import (DEGENERATE, affine_dimension, centroid, contains,
                                 convex_hull, facet_contains, project, unproject, volume)


def simplex(n, total=1.0):
    return np.eye(n) * total


def test_project_round_trip():
    pts = np.array([[1.0, 2.0, 3.0], [0.0, 0.0, 6.0]])
    proj = project(pts)
    np.testing.assert_array_equal(proj, [[1, 2], [0, 0]])
    np.testing.assert_allclose(unproject(proj, 6.0), pts)


def test_project_rejects_off_hyperplane():
    with pytest.raises(ContractError):
        project([[1.0, 0.0], [0.0, 1.1]])


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_standard_simplex_volume(n):
    # the projected standard simplex is the corner simplex of volume 1/(n-1)!
    poly = convex_hull(simplex(n))
    assert volume(poly) == pytest.approx(1 / math.factorial(n - 1), rel=1e-12)
    assert len(poly.vertices) == n


def test_cube_volume_and_facets():
    # a shifted unit cube in the chart of n = 4
    corners = np.array([[i, j, k] for i in (0, 1) for j in (0, 1) for k in (0, 1)], float)
    pts = unproject(corners + 0.25, 5.0)
    poly = convex_hull(pts)
    assert volume(poly) == pytest.approx(1.0, rel=1e-12)
    assert len(poly.facets) == 6
    assert facet_contains(poly, [0.75, 0.75, 0.75])
    assert not facet_contains(poly, [1.5, 0.75, 0.75])


def test_interior_points_are_pruned():
    pts = np.vstack([simplex(3), [[1 / 3, 1 / 3, 1 / 3], [0.5, 0.25, 0.25]]])
    poly = convex_hull(pts)
    assert len(poly.vertices) == 3


def test_degenerate_inputs():
    seg = convex_hull([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.5, 0.5, 0.0]])
    assert seg.degenerate and seg.affine_dim == 1
    v = volume(seg)
    assert v == 0.0 and v is DEGENERATE
    point = convex_hull([[1.0, 2.0]])
    assert point.degenerate and volume(point) is DEGENERATE
    empty = convex_hull(np.empty((0, 3)))
    assert empty.empty and empty.degenerate


def test_one_dimensional_chart():
    poly = convex_hull([[0.2, 0.8], [0.7, 0.3], [0.5, 0.5]])
    assert not poly.degenerate
    assert volume(poly) == pytest.approx(0.5)


def test_affine_dimension():
    assert affine_dimension(np.eye(4)) == 3
    assert affine_dimension([[0, 0], [1, 1], [2, 2]]) == 1
    assert affine_dimension([[3, 3]]) == 0


@settings(max_examples=15, deadline=None)
@given(st.integers(3, 5), st.integers(0, 2**32 - 1))
def test_volume_matches_monte_carlo(n, seed):
    rng = np.random.default_rng(seed)
    d = n - 1
    pts = rng.uniform(0, 1, size=(12, d))
    poly = convex_hull(pts, projected=True)
    samples = rng.uniform(0, 1, size=(40000, d))
    inside = (samples @ poly.facets[:, :-1].T + poly.facets[:, -1] <= 0).all(axis=1)
    est = inside.mean()
    se = math.sqrt(est * (1 - est) / len(samples))
    assert abs(volume(poly) - est) <= 5 * se + 1e-3


@settings(max_examples=15, deadline=None)
@given(st.integers(3, 5), st.integers(0, 2**32 - 1))
def test_volume_affine_invariance(n, seed):
    rng = np.random.default_rng(seed)
    d = n - 1
    pts = rng.normal(size=(15, d))
    a = rng.normal(size=(d, d))
    base = volume(convex_hull(pts, projected=True))
    mapped = volume(convex_hull(pts @ a.T + 3.0, projected=True))
    assert mapped == pytest.approx(base * abs(np.linalg.det(a)), rel=1e-8)


def test_volume_monotone_under_inclusion():
    rng = np.random.default_rng(7)
    pts = rng.normal(size=(40, 3))
    sub = volume(convex_hull(pts[:20], projected=True))
    full = volume(convex_hull(pts, projected=True))
    assert sub <= full + 1e-12


def test_contains():
    pts = simplex(3)
    assert contains(pts, [1 / 3, 1 / 3, 1 / 3])
    assert contains(pts, [1.0, 0.0, 0.0])
    assert not contains(pts, [1.2, -0.2, 0.0])
    assert not contains(pts, [0.5, 0.5, 0.5])
    with pytest.raises(ContractError):
        contains(np.empty((0, 3)), [0, 0, 0])


def test_centroid():
    np.testing.assert_allclose(centroid(simplex(4)), [0.25] * 4)
    with pytest.raises(ContractError):
        centroid(np.empty((0, 2)))


def test_hull_to_dict():
    poly = convex_hull(simplex(3))
    data = poly.to_dict(volume(poly))
    assert data["chart"] == "drop-last-coordinate"
    assert len(data["facet_normals"]) == len(data["facet_offsets"]) == 3
