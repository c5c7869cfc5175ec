"""Approximation-quality measures: EPR, VR and RDC.

* EPR: fraction of the true vertices recovered.
* VR: approximated hull volume over true core volume (same chart).
* RDC: excess total distance from the true vertices to the approximated
  centroid, relative to the worst excess attainable at a true vertex.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError
from .geometry import Polytope, centroid, volume

EPR_MATCH_TOL = 1e-6
VR_SLACK = 1e-9
WDC_FLOOR = 1e-12


def _pts(vs) -> np.ndarray:
    return np.asarray(getattr(vs, "points", vs), dtype=np.float64)


def epr(approx, exact) -> tuple[int, int, float]:
    """``(matched, |exact|, matched / |exact|)`` with max-norm matching."""
    a, e = _pts(approx), _pts(exact)
    if len(e) == 0:
        raise ContractError("EPR needs a nonempty reference vertex set")
    if len(a) == 0:
        return 0, len(e), 0.0
    matched = np.zeros(len(e), dtype=bool)
    for start in range(0, len(a), 512):
        block = a[start:start + 512]
        close = np.abs(block[:, None, :] - e[None, :, :]).max(axis=2) <= EPR_MATCH_TOL
        hits = close.sum(axis=1)
        if (hits == 0).any():
            bad = block[np.flatnonzero(hits == 0)[0]]
            raise ContractError(
                f"approximated point {bad.tolist()} matches no reference vertex"
            )
        if (hits > 1).any():
            raise ContractError("an approximated point matches several reference vertices")
        matched |= close.any(axis=0)
    num = int(matched.sum())
    return num, len(e), num / len(e)


def vr(approx_poly: Polytope, exact_poly: Polytope) -> tuple[float | None, str | None]:
    """Volume ratio and an optional note.

    Returns ``(None, reason)`` when the reference core is empty or
    lower-dimensional, ``(0.0, "DEGENERATE-numerator")`` for a flat
    approximation, otherwise the ratio clamped to ``[0, 1]``.
    """
    if exact_poly.empty:
        return None, "EMPTY-REFERENCE"
    if exact_poly.degenerate:
        return None, "DEGENERATE-REFERENCE"
    if approx_poly.proj_dim != exact_poly.proj_dim:
        raise ContractError("polytopes live in different charts")
    den = volume(exact_poly)
    if approx_poly.empty:
        return 0.0, "EMPTY-APPROX"
    if approx_poly.degenerate:
        return 0.0, "DEGENERATE-numerator"
    ratio = volume(approx_poly) / den
    if ratio > 1.0 + VR_SLACK:
        return min(ratio, 1.0), f"CLAMPED({ratio:.12g})"
    return min(max(ratio, 0.0), 1.0), None


def total_distance(points, y) -> float:
    """Sum of Euclidean distances from every point to ``y``."""
    return float(np.linalg.norm(_pts(points) - np.asarray(y), axis=1).sum())


def reference_spread(exact) -> tuple[np.ndarray, float, float]:
    """``(CC, D(CC), max_e D(e))`` where ``D(y)`` sums distances to ``y``."""
    e = _pts(exact)
    if len(e) == 0:
        raise ContractError("RDC needs a nonempty reference vertex set")
    cc = centroid(e)
    worst = 0.0
    for start in range(0, len(e), 256):
        block = e[start:start + 256]
        sums = np.linalg.norm(block[:, None, :] - e[None, :, :], axis=2).sum(axis=1)
        worst = max(worst, float(sums.max()))
    return cc, total_distance(e, cc), worst


def rdc(exact, approx_centroid, spread=None) -> tuple[float, float | None, float | None]:
    """Return ``(adc, wdc, rdc)``; ``wdc`` and ``rdc`` are None when flat.

    ``spread`` may carry a cached :func:`reference_spread` of ``exact``.
    """
    e = _pts(exact)
    cc, base, worst = spread if spread is not None else reference_spread(e)
    if base <= WDC_FLOOR:
        return 0.0, None, None
    adc = (total_distance(e, approx_centroid) - base) / base
    wdc = (worst - base) / base
    if wdc <= WDC_FLOOR:
        return adc, wdc, None
    return adc, wdc, adc / wdc


def rdc_single_fraction(exact, approx_centroid) -> float:
    """RDC as one fraction of distance sums, without normalising by D(CC)."""
    e = _pts(exact)
    cc = centroid(e)
    base = total_distance(e, cc)
    worst = max(total_distance(e, p) for p in e)
    return (total_distance(e, approx_centroid) - base) / (worst - base)


@dataclass
class MetricsReport:
    epr_num: int | None = None
    epr_den: int | None = None
    epr: float | None = None
    vr: float | None = None
    adc: float | None = None
    wdc: float | None = None
    rdc: float | None = None
    solve_time_s: float | None = None
    hull_time_s: float | None = None
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def evaluate(approx, exact, approx_poly: Polytope, exact_poly: Polytope,
             solve_time_s: float | None = None, spread=None) -> MetricsReport:
    """All three measures for one approximation against one reference."""
    report = MetricsReport(solve_time_s=solve_time_s)
    report.epr_num, report.epr_den, report.epr = epr(approx, exact)
    report.vr, note = vr(approx_poly, exact_poly)
    if note:
        report.notes.append(note)
    if len(_pts(approx)) == 0:
        report.notes.append("EMPTY-APPROX")
        return report
    report.adc, report.wdc, report.rdc = rdc(exact, centroid(approx), spread)
    if report.rdc is None:
        report.notes.append("RDC-UNDEFINED")
    elif report.adc < 0:
        report.notes.append("NEGATIVE-ADC")
    return report
