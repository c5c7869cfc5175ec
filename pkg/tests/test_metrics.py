import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coreapprox.approx import VertexSet
from coreapprox.errors import ContractError
from coreapprox.geometry import convex_hull
from coreapprox.metrics import (epr, evaluate, rdc, rdc_single_fraction, reference_spread,
                                total_distance, vr)

G3_VERTS = np.eye(3)


def test_epr_counts_matches():
    assert epr(G3_VERTS[:2], G3_VERTS) == (2, 3, pytest.approx(2 / 3))
    assert epr(G3_VERTS + 5e-7, G3_VERTS)[0] == 3
    assert epr(np.empty((0, 3)), G3_VERTS) == (0, 3, 0.0)


def test_epr_rejects_foreign_point():
    with pytest.raises(ContractError, match="matches no reference"):
        epr([[0.5, 0.5, 0.0]], G3_VERTS)
    with pytest.raises(ContractError):
        epr(G3_VERTS, np.empty((0, 3)))


def test_vr_cases():
    full = convex_hull(G3_VERTS)
    assert vr(full, full) == (1.0, None)
    half = convex_hull([[1, 0, 0], [0, 1, 0], [0.5, 0, 0.5]])
    assert vr(half, full)[0] == pytest.approx(0.5)
    edge = convex_hull(G3_VERTS[:2])
    assert vr(edge, full) == (0.0, "DEGENERATE-numerator")
    assert vr(full, edge) == (None, "DEGENERATE-REFERENCE")
    empty = convex_hull(np.empty((0, 3)))
    assert vr(empty, full) == (0.0, "EMPTY-APPROX")
    assert vr(full, empty) == (None, "EMPTY-REFERENCE")


def test_vr_clamps_numerical_excess():
    full = convex_hull(G3_VERTS)
    bigger = convex_hull(np.array([[1 + 1e-6, -1e-6, 0], [0, 1, 0], [0, 0, 1]]))
    value, note = vr(bigger, full)
    assert value == 1.0 and note.startswith("CLAMPED")


def test_rdc_closed_form_g3():
    # centroid of two vertices: ADC and WDC give exactly one half
    adc, wdc, r = rdc(G3_VERTS, [0.5, 0.5, 0.0])
    assert r == pytest.approx(0.5, abs=1e-12)
    assert rdc(G3_VERTS, G3_VERTS.mean(axis=0))[2] == pytest.approx(0.0, abs=1e-12)
    assert rdc(G3_VERTS, [1.0, 0.0, 0.0])[2] == pytest.approx(1.0, abs=1e-12)


def test_rdc_g3_by_hand():
    cc = np.full(3, 1 / 3)
    base = 3 * np.sqrt(2 / 3)
    worst = 2 * np.sqrt(2)
    mid = np.array([0.5, 0.5, 0.0])
    expected_adc = (total_distance(G3_VERTS, mid) - base) / base
    adc, wdc, _ = rdc(G3_VERTS, mid)
    assert total_distance(G3_VERTS, cc) == pytest.approx(base)
    assert wdc == pytest.approx((worst - base) / base)
    assert adc == pytest.approx(expected_adc)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(3, 30), st.integers(0, 2**32 - 1))
def test_rdc_single_fraction_agrees(n, m, seed):
    rng = np.random.default_rng(seed)
    e = rng.normal(size=(m, n))
    sub = e[rng.choice(m, size=max(1, m // 2), replace=False)]
    y = sub.mean(axis=0)
    assert rdc(e, y)[2] == pytest.approx(rdc_single_fraction(e, y), rel=1e-9, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5), st.integers(3, 25), st.integers(0, 2**32 - 1))
def test_rdc_at_most_one_for_subset_centroids(n, m, seed):
    # D is convex, so D(mean of subset) <= max over the subset <= max over all
    rng = np.random.default_rng(seed)
    e = rng.normal(size=(m, n))
    sub = e[rng.choice(m, size=rng.integers(1, m + 1), replace=False)]
    assert rdc(e, sub.mean(axis=0))[2] <= 1 + 1e-9


def test_reference_spread_chunking_matches_direct():
    rng = np.random.default_rng(3)
    e = rng.normal(size=(700, 4))
    cc, base, worst = reference_spread(e)
    direct = np.linalg.norm(e[:, None] - e[None], axis=2).sum(axis=1).max()
    assert worst == pytest.approx(direct)
    assert base == pytest.approx(total_distance(e, e.mean(axis=0)))


def test_rdc_undefined_for_single_vertex():
    assert rdc([[1.0, 2.0]], [1.0, 2.0]) == (0.0, None, None)


def test_evaluate_g3(g3):
    exact = VertexSet(3, points=G3_VERTS)
    approx = VertexSet(3, points=G3_VERTS[:2])
    report = evaluate(approx, exact, convex_hull(approx.points), convex_hull(exact.points))
    assert (report.epr_num, report.epr_den) == (2, 3)
    assert report.vr == 0.0
    assert "DEGENERATE-numerator" in report.notes
    assert report.rdc == pytest.approx(0.5)
    full = evaluate(exact, exact, convex_hull(G3_VERTS), convex_hull(G3_VERTS))
    assert full.epr == 1.0 and full.vr == 1.0 and full.rdc == pytest.approx(0.0, abs=1e-12)
    assert set(full.as_dict()) >= {"epr", "vr", "rdc", "notes"}
