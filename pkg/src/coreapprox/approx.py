"""Approximate the core by collecting LP vertices for sampled directions."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _jsonio
from .directions import RNG_ALGORITHM, DirectionScheme, DirectionStream
from .errors import ContractError, GameFormatError, SolverFailure
from .games import TUGame, coalition_matrix, coalition_sums
from .lp import INFEASIBLE, CoreLPSolver, build_core_lp

DEDUP_TOL = 1e-7
TIGHT_TOL = 1e-7
FEAS_TOL = 1e-8


class Source(str, Enum):
    APPROX = "APPROX"
    ORACLE = "ORACLE"
    SATURATION = "SATURATION"


class VertexSet:
    """Points that are pairwise more than ``DEDUP_TOL`` apart in the max norm."""

    def __init__(self, n: int, source=Source.APPROX, game_label: str = "",
                 points=(), complete: bool | None = None):
        self.n = n
        self.source = Source(source)
        self.game_label = game_label
        self.complete = complete
        self._buf = np.empty((max(16, len(points)), n))
        self._size = 0
        for p in points:
            self.insert(p)

    def __len__(self):
        return self._size

    def __iter__(self):
        return iter(self.points)

    @property
    def points(self) -> np.ndarray:
        return self._buf[: self._size]

    def find(self, x, tol=DEDUP_TOL) -> int:
        """Index of a stored point within ``tol`` of ``x``, or -1."""
        if self._size == 0:
            return -1
        dist = np.abs(self.points - x).max(axis=1)
        j = int(np.argmin(dist))
        return j if dist[j] <= tol else -1

    def insert(self, x) -> bool:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise ContractError(f"point of shape {x.shape} does not match n={self.n}")
        if not np.all(np.isfinite(x)):
            raise ContractError("cannot insert a non-finite point")
        if self.find(x) >= 0:
            return False
        if self._size == self._buf.shape[0]:
            self._buf = np.vstack([self._buf, np.empty_like(self._buf)])
        self._buf[self._size] = x
        self._size += 1
        return True

    def copy(self) -> "VertexSet":
        out = VertexSet(self.n, self.source, self.game_label, complete=self.complete)
        out._buf = self._buf.copy()
        out._size = self._size
        return out

    def canonical(self) -> np.ndarray:
        """Points sorted lexicographically (first coordinate most significant)."""
        pts = self.points
        if len(pts) == 0:
            return pts.copy()
        # rounded keys so ties up to float noise do not flip the order
        order = np.lexsort(np.round(pts, 9).T[::-1])
        return pts[order]

    def to_dict(self) -> dict:
        return {
            "game": self.game_label,
            "n": self.n,
            "source": self.source.value,
            "complete": self.complete,
            "count": len(self),
            "vertices": self.canonical().tolist(),
        }


def dedup_insert(vs: VertexSet, x) -> VertexSet:
    vs.insert(x)
    return vs


def verify_vertex(game: TUGame, x) -> bool:
    """True iff ``x`` is in the core and its tight rows have rank ``n``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (game.n,):
        raise ContractError(f"allocation has length {x.shape}, expected {game.n}")
    scale = max(1.0, abs(game.worth))
    slack = coalition_sums(x) - game.values
    slack[0] = 0.0
    if slack[1:].min() < -FEAS_TOL * scale or abs(slack[-1]) > FEAS_TOL * scale:
        return False
    tight = np.flatnonzero(np.abs(slack) <= TIGHT_TOL * scale)
    tight = tight[tight > 0]
    rows = coalition_matrix(game.n)[tight]
    return np.linalg.matrix_rank(rows, tol=1e-10) == game.n


@dataclass
class ApproxResult:
    vertices: VertexSet
    k: int
    scheme: DirectionScheme
    solve_time_s: float
    lp_stats: dict = field(default_factory=dict)
    empty_core: bool = False
    snapshots: dict = field(default_factory=dict)

    def to_dict(self, timing: bool = True) -> dict:
        out = {
            "game": self.vertices.game_label,
            "n": self.vertices.n,
            "k": self.k,
            "scheme": self.scheme.code,
            "seed": int(self.scheme.seed),
            "perturbation": self.scheme.perturbation,
            "rng": RNG_ALGORITHM,
            "empty_core": self.empty_core,
            "solve_time_s": self.solve_time_s if timing else None,
        }
        out.update(self.vertices.to_dict())
        return out


def vertex_set_from_dict(data) -> VertexSet:
    try:
        n = int(data["n"])
        pts = np.asarray(data["vertices"], dtype=np.float64).reshape(-1, n)
        vs = VertexSet(n, data.get("source", "APPROX"), data.get("game", ""),
                       complete=data.get("complete"))
    except (KeyError, TypeError, ValueError) as exc:
        raise GameFormatError(f"malformed vertex file: {exc}") from exc
    for p in pts:
        vs.insert(p)
    return vs


def load_vertex_set(path) -> VertexSet:
    return vertex_set_from_dict(_jsonio.load(path))


def save_result(result, path, timing: bool = True) -> None:
    data = result.to_dict(timing) if isinstance(result, ApproxResult) else result.to_dict()
    _jsonio.dump(data, path)


class CoreSampler:
    """Stateful driver: one solver, one growing vertex set, warm-start chain.

    Each call to :meth:`draw` solves one LP, warm-started from the basis of
    the previous solve, verifies any new vertex and inserts it.
    """

    def __init__(self, game: TUGame, source=Source.APPROX):
        self.game = game
        self.solver = CoreLPSolver(build_core_lp(game))
        self.vertices = VertexSet(game.n, source, game.label)
        self.empty = False
        self.draws = 0
        self.solve_time = 0.0
        self.verify_time = 0.0
        self._basis = None

    def draw(self, c) -> bool:
        """Solve for direction ``c``; True iff a new vertex was added."""
        if self.empty:
            return False
        t0 = time.perf_counter()
        sol = self.solver.solve(c, self._basis)
        t1 = time.perf_counter()
        self.draws += 1
        if sol is INFEASIBLE:
            self.empty = True
            self.solve_time += t1 - t0
            return False
        self._basis = sol.basis
        added = False
        if self.vertices.find(sol.x) < 0:
            if not verify_vertex(self.game, sol.x):
                raise SolverFailure("solver returned a point that is not a core vertex",
                                    {"x": sol.x.tolist(), "basis": sol.basis.rows})
            added = self.vertices.insert(sol.x)
        t2 = time.perf_counter()
        self.solve_time += t2 - t0
        self.verify_time += t2 - t1
        return added

    def stats(self) -> dict:
        out = self.solver.stats.as_dict()
        out["verify_time_s"] = self.verify_time
        return out


def approximate_core(game: TUGame, k: int, scheme: DirectionScheme,
                     stream: int = 0, snapshots=()) -> ApproxResult:
    """Collect vertices of the core from ``k`` sampled LP objectives.

    Parameters
    ----------
    game : TUGame
    k : int
        Number of LP solves.
    scheme : DirectionScheme
        Direction scheme and seed.
    stream : int
        Index of the random stream (run or worker index).
    snapshots : iterable of int
        Draw counts at which to record a copy of the vertex set and the
        elapsed solve time, e.g. ``(100, 250)``; the prefix property makes
        these identical to separate runs with smaller ``k``.
    """
    if k < 1:
        raise ContractError(f"k must be at least 1, got {k}")
    marks = sorted({int(s) for s in snapshots if 1 <= int(s) <= k})
    sampler = CoreSampler(game)
    directions = DirectionStream(scheme, game.n, stream)
    taken = {}
    for i in range(1, k + 1):
        sampler.draw(next(directions))
        if sampler.empty:
            break
        if marks and i == marks[0]:
            taken[marks.pop(0)] = (sampler.vertices.copy(), sampler.solve_time)
    result = ApproxResult(sampler.vertices, k, scheme, sampler.solve_time,
                          sampler.stats(), sampler.empty)
    for mark, (vs, t) in taken.items():
        result.snapshots[mark] = ApproxResult(vs, mark, scheme, t, {}, False)
    if sampler.empty:
        for mark in marks:
            result.snapshots[mark] = ApproxResult(sampler.vertices, mark, scheme,
                                                  sampler.solve_time, {}, True)
    return result
