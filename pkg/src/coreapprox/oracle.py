"""Ground-truth vertex sets and exact membership for small games."""

from __future__ import annotations

import itertools
import logging
import math

import numpy as np

from .approx import CoreSampler, Source, VertexSet, verify_vertex
from .directions import DirectionScheme, DirectionStream, SchemeKind
from .errors import CapacityError, ContractError
from .games import TUGame, coalition_matrix, coalition_sums

log = logging.getLogger(__name__)

MAX_NAIVE_PLAYERS = 6
MAX_MARGINAL_PLAYERS = 10
MEMBERSHIP_TOL = 1e-8
# stream indices kept clear of per-run streams 0, 1, 2, ...
SATURATION_STREAMS = (2**32, 2**32 + 1)


def exact_core_membership(game: TUGame, x) -> bool:
    """Scan all ``2**n - 1`` coalition constraints."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (game.n,):
        raise ContractError(f"allocation has length {x.shape}, expected {game.n}")
    tol = MEMBERSHIP_TOL * max(1.0, abs(game.worth))
    slack = coalition_sums(x) - game.values
    return bool(slack[1:].min() >= -tol and abs(slack[-1]) <= tol)


def _combination_chunks(m, r, size):
    it = itertools.combinations(range(m), r)
    while True:
        flat = np.fromiter(itertools.chain.from_iterable(itertools.islice(it, size)),
                           dtype=np.int32)
        if flat.size == 0:
            return
        yield flat.reshape(-1, r)


def enumerate_vertices_naive(game: TUGame, chunk: int = 100_000) -> VertexSet:
    """All core vertices by solving every square system of tight rows.

    For each choice of ``n - 1`` inequality rows, together with the
    efficiency row, the square system is solved when nonsingular and the
    solution kept if it satisfies every core constraint. The candidate count
    ``C(2**n - 2, n - 1)`` limits this to ``n <= 6``.
    """
    n = game.n
    if n > MAX_NAIVE_PLAYERS:
        raise CapacityError(
            f"naive enumeration needs C(2^n-2, n-1) square solves; n={n} gives "
            f"{math.comb((1 << n) - 2, n - 1):.3g} (limit n <= {MAX_NAIVE_PLAYERS}). "
            "Use saturation_reference for larger games."
        )
    out = VertexSet(n, Source.ORACLE, game.label, complete=True)
    scale = max(1.0, abs(game.worth))
    rows = coalition_matrix(n)[1:-1]  # proper nonempty coalitions
    rhs = game.values[1:-1]
    if n == 1:
        out.insert([game.worth])
        return out
    ones = np.ones((1, 1, n))
    found = []
    for combo in _combination_chunks(len(rows), n - 1, chunk):
        mats = np.concatenate([np.broadcast_to(ones, (len(combo), 1, n)), rows[combo]], axis=1)
        # 0/1 matrices have integer determinants
        ok = np.abs(np.linalg.det(mats)) > 0.5
        if not ok.any():
            continue
        b = np.concatenate([np.full((ok.sum(), 1), game.worth), rhs[combo[ok]]], axis=1)
        xs = np.linalg.solve(mats[ok], b[..., None])[..., 0]
        feasible = (xs @ rows.T - rhs >= -1e-8 * scale).all(axis=1)
        if feasible.any():
            found.append(np.unique(np.round(xs[feasible], 10), axis=0))
    if not found:
        return out
    cand = np.unique(np.concatenate(found), axis=0)
    for x in cand:
        if verify_vertex(game, x):
            out.insert(x)
    return out


def saturation_reference(game: TUGame, stall_budget: int, seed: int = 0,
                         max_draws: int | None = None) -> VertexSet:
    """Sample vertices until ``stall_budget`` consecutive draws add nothing.

    Draws alternate between the sphere and perturbed-sign schemes. The
    result carries ``complete = False``: saturation is evidence, not proof.
    """
    if stall_budget < 1:
        raise ContractError("stall_budget must be positive")
    sampler = CoreSampler(game, Source.SATURATION)
    streams = [
        DirectionStream(DirectionScheme(SchemeKind.RANDOM_SPHERE, seed), game.n,
                        SATURATION_STREAMS[0]),
        DirectionStream(DirectionScheme(SchemeKind.DETERMINISTIC_SIGNS, seed), game.n,
                        SATURATION_STREAMS[1]),
    ]
    stall = 0
    while stall < stall_budget:
        if max_draws is not None and sampler.draws >= max_draws:
            break
        added = sampler.draw(next(streams[sampler.draws % 2]))
        if sampler.empty:
            break
        stall = 0 if added else stall + 1
    log.info("saturation: %d vertices after %d draws", len(sampler.vertices), sampler.draws)
    result = sampler.vertices
    result.complete = False
    return result


def is_convex(game: TUGame, tol: float = 1e-9) -> bool:
    """Supermodularity via ``v(S+i+j) - v(S+i) - v(S+j) + v(S) >= 0``."""
    v = game.values
    masks = np.arange(1 << game.n, dtype=np.int64)
    for i in range(game.n):
        for j in range(i + 1, game.n):
            s = masks[((masks >> i) & 1 == 0) & ((masks >> j) & 1 == 0)]
            bi, bj = 1 << i, 1 << j
            if (v[s | bi | bj] - v[s | bi] - v[s | bj] + v[s] < -tol).any():
                return False
    return True


def marginal_vectors(game: TUGame) -> VertexSet:
    """Distinct marginal contribution vectors over all player orderings.

    For convex games these are exactly the core vertices.
    """
    n = game.n
    if n > MAX_MARGINAL_PLAYERS:
        raise CapacityError(f"n! orderings limited to n <= {MAX_MARGINAL_PLAYERS}")
    v = game.values
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    xs = np.zeros(perms.shape, dtype=np.float64)
    prefix = np.zeros(len(perms), dtype=np.int64)
    rows = np.arange(len(perms))
    for pos in range(n):
        players = perms[:, pos]
        grown = prefix | (1 << players)
        xs[rows, players] = v[grown] - v[prefix]
        prefix = grown
    out = VertexSet(n, Source.ORACLE, game.label, complete=True)
    for x in np.unique(np.round(xs, 10), axis=0):
        out.insert(x)
    return out
