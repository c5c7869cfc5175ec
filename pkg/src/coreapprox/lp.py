"""Core-defining linear program and a warm-startable simplex solver.

The feasible region is ``{x : sum(x) = v(N), x(T) >= v(T) for proper T}``.
Because there are ``2**n - 2`` inequality rows but only ``n`` variables, the
solver works on *row* bases: a basis is a set of ``n`` linearly independent
constraint rows (always including the efficiency row) that are tight at the
current vertex. One pivot swaps a basic row for a blocking row, moving along
an edge of the polytope. Rows are identified by coalition bitmask, so the
efficiency row is the grand-coalition mask ``2**n - 1``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from .errors import InternalSolverError, SolverFailure
from .games import TUGame, coalition_matrix

log = logging.getLogger(__name__)

FEAS_TOL = 1e-8  # relative to max(1, |v(N)|)
DUAL_TOL = 1e-8
PIVOT_TOL = 1e-9
RANK_TOL = 1e-10
PHASE1_TOL = 1e-7
REFACTOR_EVERY = 50


class _Infeasible:
    """Marker returned by :meth:`CoreLPSolver.solve` when the core is empty."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFEASIBLE"

    def __bool__(self):
        return False


INFEASIBLE = _Infeasible()


@dataclass(frozen=True, eq=False)
class LPInstance:
    """``max c.x`` over the core of ``game``.

    ``rows[j]`` is the indicator of coalition ``j + 1``; the last row is the
    efficiency row (grand coalition), all others are ``>=`` rows.
    """

    n: int
    rows: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)
    scale: float = 1.0

    @property
    def eq_index(self) -> int:
        return self.rows.shape[0] - 1

    @property
    def n_inequalities(self) -> int:
        return self.rows.shape[0] - 1

    def row_id(self, index: int) -> int:
        """Coalition bitmask of a row index."""
        return index + 1

    def slacks(self, x) -> np.ndarray:
        return self.rows @ x - self.rhs


def build_core_lp(game: TUGame) -> LPInstance:
    rows = coalition_matrix(game.n)[1:]
    rhs = game.values[1:].copy()
    rhs.setflags(write=False)
    return LPInstance(game.n, rows, rhs, max(1.0, abs(game.worth)))


@dataclass(frozen=True)
class Basis:
    """Coalition masks of ``n`` tight, independent rows (efficiency included)."""

    rows: tuple

    def __len__(self):
        return len(self.rows)


@dataclass
class VertexSolution:
    x: np.ndarray
    objective: float
    basis: Basis
    tight_set: list
    pivots: int = 0
    warm: bool = False


@dataclass
class SolverStats:
    solves: int = 0
    warm_starts: int = 0
    cold_starts: int = 0
    pivots: int = 0
    degenerate_pivots: int = 0
    bland_pivots: int = 0

    def as_dict(self):
        return dict(self.__dict__)


class _RowSimplex:
    """Primal simplex over row bases for ``max c.x, A_eq x = b_eq, A x >= b``.

    ``A`` holds every row; ``is_eq`` flags the equality rows, which enter the
    initial basis and never leave it. The feasible region must be bounded
    along every improving direction.
    """

    def __init__(self, A, b, is_eq, feas_tol, max_pivots):
        self.A = A
        self.b = b
        self.is_eq = is_eq
        self.d = A.shape[1]
        self.feas_tol = feas_tol
        self.max_pivots = max_pivots
        self.stats = SolverStats()

    # -- vertex construction -------------------------------------------------

    def purify(self, x, c):
        """Walk from feasible ``x`` to a vertex without decreasing ``c.x``."""
        A, b = self.A, self.b
        basis = list(np.flatnonzero(self.is_eq))
        x = np.array(x, dtype=np.float64)
        tight_tol = self.feas_tol
        for _ in range(2 * self.d + 2):
            slack = A @ x - b
            cand = np.flatnonzero((np.abs(slack) <= tight_tol) & ~self.is_eq)
            basis = _extend_independent(A, basis, cand, self.d)
            if len(basis) == self.d:
                return x, basis
            ns = null_space(A[basis], rcond=RANK_TOL)
            d = ns @ (ns.T @ c)
            if np.linalg.norm(d) < 1e-12:
                d = ns[:, 0]
            for direction in (d, -d):
                Ad = A @ direction
                block = Ad < -PIVOT_TOL
                block[basis] = False
                if block.any():
                    break
            else:
                raise InternalSolverError("core LP is unbounded along a null-space direction")
            idx = np.flatnonzero(block)
            steps = np.maximum(slack[idx], 0.0) / -Ad[idx]
            j = int(np.argmin(steps))
            x = x + steps[j] * direction
            basis.append(int(idx[j]))
            basis = _extend_independent(A, basis[:-1], [basis[-1]], self.d)
        raise SolverFailure("could not reach a vertex while purifying a feasible point")

    # -- simplex iterations ---------------------------------------------------

    def factor(self, basis):
        M = self.A[basis]
        try:
            inv = np.linalg.inv(M)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(inv)) or np.linalg.cond(M) > 1e12:
            return None
        return inv

    def run(self, c, basis, binv=None):
        """Simplex from a primal-feasible basis; returns ``(x, basis, pivots)``."""
        A, b, d = self.A, self.b, self.d
        basis = list(basis)
        binv = self.factor(basis) if binv is None else binv
        if binv is None:
            raise SolverFailure("starting basis is singular", {"basis": basis})
        in_basis = np.zeros(A.shape[0], dtype=bool)
        in_basis[basis] = True
        eq_pos = self.is_eq[basis]
        x = binv @ b[basis]
        degenerate_run = 0
        since_refactor = 0
        for pivots in range(self.max_pivots + 1):
            y = c @ binv
            y[eq_pos] = -np.inf
            bland = degenerate_run > 5 * d
            if bland:
                eligible = np.flatnonzero(y > DUAL_TOL)
                if eligible.size == 0:
                    return x, basis, pivots
                r = int(min(eligible, key=lambda k: basis[k]))
            else:
                r = int(np.argmax(y))
                if y[r] <= DUAL_TOL:
                    return x, basis, pivots
            if pivots == self.max_pivots:
                break
            direction = binv[:, r]
            Ad = A @ direction
            block = Ad < -PIVOT_TOL
            block[in_basis] = False
            idx = np.flatnonzero(block)
            if idx.size == 0:
                raise InternalSolverError(
                    "core LP reported unbounded", {"basis": basis, "c": c.tolist()}
                )
            slack = np.maximum(A[idx] @ x - b[idx], 0.0)
            steps = slack / -Ad[idx]
            tmin = steps.min()
            ties = np.flatnonzero(steps <= tmin + 1e-12)
            if bland:
                q = int(idx[ties].min())
            else:
                q = int(idx[ties[np.argmin(Ad[idx[ties]])]])
            # rank-one update of the basis inverse for row r -> row q
            aq = A[q]
            denom = aq @ direction
            u = aq @ binv
            u[r] -= 1.0
            binv = binv - np.outer(direction, u) / denom
            in_basis[basis[r]] = False
            in_basis[q] = True
            basis[r] = q
            since_refactor += 1
            if since_refactor >= REFACTOR_EVERY:
                fresh = self.factor(basis)
                if fresh is None:
                    raise SolverFailure("basis became singular", {"basis": basis})
                binv = fresh
                since_refactor = 0
            x = binv @ b[basis]
            self.stats.pivots += 1
            if tmin <= 1e-12:
                degenerate_run += 1
                self.stats.degenerate_pivots += 1
            else:
                degenerate_run = 0
            if bland:
                self.stats.bland_pivots += 1
        raise SolverFailure(
            "pivot limit reached without optimality",
            {"max_pivots": self.max_pivots, "basis": basis},
        )


def _extend_independent(A, basis, candidates, limit):
    """Greedily append candidate rows that are independent of ``basis``."""
    basis = list(basis)
    if len(basis) >= limit:
        return basis
    q = np.linalg.qr(A[basis].T)[0] if basis else np.zeros((A.shape[1], 0))
    for j in candidates:
        if j in basis:
            continue
        row = A[j]
        resid = row - q @ (q.T @ row)
        norm = np.linalg.norm(resid)
        if norm > 1e-9 * max(1.0, np.linalg.norm(row)):
            basis.append(int(j))
            q = np.column_stack([q, resid / norm])
            if len(basis) == limit:
                break
    return basis


class CoreLPSolver:
    """Maximise linear objectives over the core of one game.

    One solver instance owns mutable state and must not be shared between
    threads; the :class:`LPInstance` it wraps is immutable.
    """

    def __init__(self, lp: LPInstance, max_pivots: int | None = None):
        self.lp = lp
        n = lp.n
        max_pivots = max_pivots or max(10_000, 50 * lp.rows.shape[0])
        is_eq = np.zeros(lp.rows.shape[0], dtype=bool)
        is_eq[lp.eq_index] = True
        self._feas = FEAS_TOL * lp.scale
        self._core = _RowSimplex(lp.rows, lp.rhs, is_eq, self._feas, max_pivots)
        # phase 1: rows [a_T, 1] . (x, s) >= v(T), plus s >= 0; maximise -s
        elastic = np.ones((lp.rows.shape[0], 1))
        elastic[lp.eq_index] = 0.0
        rows1 = np.vstack([np.hstack([lp.rows, elastic]), np.eye(1, n + 1, n)])
        rhs1 = np.append(lp.rhs, 0.0)
        is_eq1 = np.append(is_eq, False)
        self._phase1 = _RowSimplex(rows1, rhs1, is_eq1, self._feas, max_pivots)
        self._nonempty = None
        self._start = None  # cached cold-start vertex basis for phase 2

    @property
    def stats(self) -> SolverStats:
        s = self._core.stats
        p = self._phase1.stats
        merged = SolverStats(**s.as_dict())
        merged.pivots += p.pivots
        merged.degenerate_pivots += p.degenerate_pivots
        merged.bland_pivots += p.bland_pivots
        return merged

    def _phase_one(self):
        lp = self.lp
        n = lp.n
        x0 = np.full(n, lp.rhs[lp.eq_index] / n)
        s0 = max(0.0, float(np.max(lp.rhs[:-1] - lp.rows[:-1] @ x0))) if n > 1 else 0.0
        z0 = np.append(x0, s0)
        obj = np.zeros(n + 1)
        obj[n] = -1.0
        z, basis = self._phase1.purify(z0, obj)
        z, basis, _ = self._phase1.run(obj, basis)
        return z

    def check_nonempty(self) -> bool:
        if self._nonempty is None:
            z = self._phase_one()
            s = float(z[-1])
            self._nonempty = s <= PHASE1_TOL
            if self._nonempty:
                x = z[:-1]
                _, basis = self._core.purify(x, np.zeros(self.lp.n))
                self._start = basis
        return self._nonempty

    def _warm_basis(self, warm):
        if warm is None:
            return None
        lp = self.lp
        if len(warm.rows) != lp.n:
            return None
        idx = [m - 1 for m in warm.rows]
        if lp.eq_index not in idx or min(idx) < 0 or max(idx) > lp.eq_index:
            return None
        binv = self._core.factor(idx)
        if binv is None:
            return None
        x = binv @ lp.rhs[idx]
        if (lp.slacks(x) < -self._feas).any():
            return None
        return idx, binv

    def solve(self, c, warm: Basis | None = None):
        """Maximise ``c.x`` over the core.

        Returns a :class:`VertexSolution`, or :data:`INFEASIBLE` when the core
        is empty. A supplied ``warm`` basis is used if it is still a feasible
        vertex basis; otherwise the solve starts cold.
        """
        c = np.asarray(c, dtype=np.float64)
        if c.shape != (self.lp.n,) or not np.all(np.isfinite(c)) or not c.any():
            raise ValueError("objective must be a finite, nonzero vector of length n")
        self._core.stats.solves += 1
        start = self._warm_basis(warm)
        if start is not None:
            self._core.stats.warm_starts += 1
            idx, binv = start
        else:
            self._core.stats.cold_starts += 1
            if not self.check_nonempty():
                return INFEASIBLE
            idx, binv = self._start, None
        x, basis, pivots = self._core.run(c, idx, binv)
        return self._certify(x, basis, c, pivots, start is not None)

    def _certify(self, x, basis, c, pivots, warm):
        lp = self.lp
        slack = lp.slacks(x)
        if (slack < -self._feas).any() or abs(slack[lp.eq_index]) > self._feas:
            raise SolverFailure(
                "solution violates core constraints",
                {"min_slack": float(slack.min()), "basis": basis},
            )
        tight = np.flatnonzero(np.abs(slack) <= 1e-7 * lp.scale)
        return VertexSolution(
            x=x,
            objective=float(c @ x),
            basis=Basis(tuple(sorted(lp.row_id(int(i)) for i in basis))),
            tight_set=[lp.row_id(int(i)) for i in tight],
            pivots=pivots,
            warm=warm,
        )


def solve_vertex(lp: LPInstance, c, warm: Basis | None = None):
    """One-shot convenience wrapper around :class:`CoreLPSolver`."""
    return CoreLPSolver(lp).solve(c, warm)


def check_nonempty(game: TUGame) -> bool:
    """Phase-1 test: True iff the core of ``game`` is nonempty."""
    return CoreLPSolver(build_core_lp(game)).check_nonempty()
