"""Transferable-utility games and the benchmark generators.

A game on ``n`` players is stored densely: ``values[mask]`` is the worth of
the coalition whose members are the set bits of ``mask`` (bit ``i`` set means
player ``i + 1`` belongs to it).
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import _jsonio
from .errors import CapacityError, ContractError, GameFormatError

log = logging.getLogger(__name__)

MAX_PLAYERS = 24
MAX_SHAPLEY_PLAYERS = 20

# Savings game parameters for eight players; smaller instances use a prefix.
BENCHMARK_SAVINGS_P = (3, 4, 6, 1, 3, 4, 5, 4)
BENCHMARK_SAVINGS_ALPHA = (1, 2, 4, 2, 5, 2, 1, 4)

# Museum pass game: five visitors (rows) over eleven museums (columns).
BENCHMARK_MUSEUM_MATRIX = np.array(
    [
        [1, 0, 0, 1, 0, 1, 0, 1, 0, 1, 0],
        [0, 1, 0, 0, 1, 1, 0, 0, 1, 0, 0],
        [1, 1, 1, 0, 0, 0, 0, 1, 1, 1, 0],
        [0, 0, 1, 1, 0, 0, 1, 0, 0, 0, 1],
        [1, 0, 0, 0, 1, 0, 1, 0, 1, 0, 0],
    ],
    dtype=np.int8,
)


@lru_cache(maxsize=None)
def coalition_matrix(n: int) -> np.ndarray:
    """0/1 membership matrix of shape ``(2**n, n)``, row ``mask`` = indicator.

    The returned array is read-only and shared between callers.
    """
    masks = np.arange(1 << n, dtype=np.int64)
    mat = ((masks[:, None] >> np.arange(n)) & 1).astype(np.float64)
    mat.setflags(write=False)
    return mat


@lru_cache(maxsize=None)
def coalition_sizes(n: int) -> np.ndarray:
    sizes = coalition_matrix(n).sum(axis=1).astype(np.int64)
    sizes.setflags(write=False)
    return sizes


def coalition_sums(x) -> np.ndarray:
    """``sums[mask] = sum(x[i] for i in mask)`` for every coalition.

    Built by doubling, so the cost is O(2**n) additions.
    """
    sums = np.zeros(1)
    for xi in np.asarray(x, dtype=np.float64):
        sums = np.concatenate([sums, sums + xi])
    return sums


def mask_of(players: Sequence[int]) -> int:
    """Bitmask for a collection of 1-based player labels."""
    mask = 0
    for p in players:
        if p < 1:
            raise ContractError(f"player labels are 1-based, got {p}")
        mask |= 1 << (p - 1)
    return mask


def players_of(mask: int) -> list[int]:
    return [i + 1 for i in range(mask.bit_length()) if mask >> i & 1]


@dataclass(frozen=True, eq=False)
class TUGame:
    """A TU-game ``(N, v)`` with ``N = {1, ..., n}``.

    Parameters
    ----------
    n : int
        Number of players.
    values : array_like
        Characteristic function indexed by coalition bitmask, length ``2**n``.
    label : str
        Free-form provenance tag.
    """

    n: int
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise GameFormatError(f"n: expected a positive integer, got {self.n!r}")
        if self.n > MAX_PLAYERS:
            raise CapacityError(
                f"n={self.n} exceeds the dense storage limit of {MAX_PLAYERS} players"
            )
        vals = np.array(self.values, dtype=np.float64).reshape(-1)
        if vals.shape[0] != 1 << self.n:
            raise GameFormatError(
                f"values: expected {1 << self.n} entries for n={self.n}, got {vals.shape[0]}"
            )
        if not np.all(np.isfinite(vals)):
            raise GameFormatError("values: all entries must be finite")
        if vals[0] != 0.0:
            raise GameFormatError(f"values[0]: v(empty set) must be 0, got {vals[0]!r}")
        vals.setflags(write=False)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "values", vals)

    @property
    def grand(self) -> int:
        return (1 << self.n) - 1

    @property
    def worth(self) -> float:
        """v(N)."""
        return float(self.values[self.grand])

    def __call__(self, coalition) -> float:
        if not isinstance(coalition, (int, np.integer)):
            coalition = mask_of(coalition)
        return coalition_value(self, int(coalition))

    def __eq__(self, other):
        if not isinstance(other, TUGame):
            return NotImplemented
        return (self.n == other.n and self.label == other.label
                and np.array_equal(self.values, other.values))

    def __hash__(self):
        return hash((self.n, self.label, self.values.tobytes()))


@dataclass(frozen=True)
class SavingsParams:
    p: tuple
    alpha: tuple
    sigma0: tuple = None

    def __post_init__(self):
        n = len(self.p)
        if len(self.alpha) != n:
            raise ContractError("p and alpha must have the same length")
        sigma = tuple(range(1, n + 1)) if self.sigma0 is None else tuple(self.sigma0)
        if sorted(sigma) != list(range(1, n + 1)):
            raise ContractError(f"sigma0 must be a permutation of 1..{n}, got {sigma}")
        object.__setattr__(self, "p", tuple(float(v) for v in self.p))
        object.__setattr__(self, "alpha", tuple(float(v) for v in self.alpha))
        object.__setattr__(self, "sigma0", sigma)

    @property
    def n(self) -> int:
        return len(self.p)

    @classmethod
    def benchmark(cls, n: int = 8) -> "SavingsParams":
        if not 1 <= n <= len(BENCHMARK_SAVINGS_P):
            raise ContractError(f"reference savings parameters exist for n <= 8, got {n}")
        return cls(BENCHMARK_SAVINGS_P[:n], BENCHMARK_SAVINGS_ALPHA[:n])


@dataclass(frozen=True)
class MuseumMatrix:
    a: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.array(self.a, dtype=np.int8)
        if a.ndim != 2:
            raise ContractError("museum matrix must be two-dimensional")
        if not np.isin(a, (0, 1)).all():
            raise ContractError("museum matrix entries must be 0 or 1")
        if (a.sum(axis=1) == 0).any():
            raise ContractError("every visitor must visit at least one museum")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def m(self) -> int:
        return self.a.shape[0]

    @property
    def n(self) -> int:
        return self.a.shape[1]

    @classmethod
    def benchmark(cls, n: int = 11) -> "MuseumMatrix":
        """Reference matrix restricted to its first ``n`` columns.

        Visitors left with no museum after truncation are dropped.
        """
        if not 1 <= n <= BENCHMARK_MUSEUM_MATRIX.shape[1]:
            raise ContractError(f"reference museum matrix has 11 columns, got n={n}")
        a = BENCHMARK_MUSEUM_MATRIX[:, :n]
        empty = a.sum(axis=1) == 0
        if empty.any():
            warnings.warn(
                f"dropping {int(empty.sum())} visitor(s) with no museum among the first {n}",
                stacklevel=2,
            )
            a = a[~empty]
        return cls(a)


def coalition_value(game: TUGame, coalition: int) -> float:
    if not 0 <= coalition < 1 << game.n:
        raise ContractError(f"coalition mask {coalition} out of range for n={game.n}")
    return float(game.values[coalition])


def _check_size(n):
    if n > MAX_PLAYERS:
        raise CapacityError(f"n={n} exceeds the dense storage limit of {MAX_PLAYERS} players")


def make_savings_game(params: SavingsParams) -> TUGame:
    """Savings game on a line ordered by ``sigma0``.

    A coalition whose members occupy consecutive positions of ``sigma0`` earns
    the sum of ``alpha_j p_i - alpha_i p_j`` over its ordered pairs where that
    quantity is positive. Other coalitions earn the sum over their maximal
    consecutive blocks.
    """
    n = params.n
    _check_size(n)
    p = np.array(params.p)
    alpha = np.array(params.alpha)
    gain = alpha[None, :] * p[:, None] - alpha[:, None] * p[None, :]
    gain = np.where(gain > 0, gain, 0.0)
    pair = gain + gain.T  # worth contributed by an unordered pair

    # position -> player index (0-based)
    order = [s - 1 for s in params.sigma0]
    # worth of each consecutive block [a, b] of positions
    block = np.zeros((n, n))
    for a in range(n):
        acc = 0.0
        for b in range(a, n):
            acc += sum(pair[order[b], order[c]] for c in range(a, b))
            block[a, b] = acc

    pos = np.empty(n, dtype=int)
    pos[order] = np.arange(n)
    values = np.zeros(1 << n)
    for mask in range(1, 1 << n):
        occupied = sorted(pos[i] for i in range(n) if mask >> i & 1)
        total, start = 0.0, occupied[0]
        for prev, cur in zip(occupied, occupied[1:]):
            if cur != prev + 1:
                total += block[start, prev]
                start = cur
        values[mask] = total + block[start, occupied[-1]]
    label = f"savings(n={n}, p={list(params.p)}, alpha={list(params.alpha)}, sigma0={list(params.sigma0)})"
    return TUGame(n, values, label)


def make_nonconvex_game(n: int, beta: float = 0.75) -> TUGame:
    """Non-convex benchmark game.

    Singletons earn 0; other coalitions earn ``|T|/n``, scaled by ``beta``
    when player ``n`` is a member. With the reference ``beta = 3/4`` the core
    is empty for every ``n >= 3``.
    """
    if n < 2:
        raise ContractError(f"the non-convex game needs n >= 2, got {n}")
    if not 0 < beta <= 1:
        raise ContractError(f"beta must lie in (0, 1], got {beta}")
    _check_size(n)
    sizes = coalition_sizes(n).astype(np.float64)
    last = (np.arange(1 << n) >> (n - 1)) & 1
    values = np.where(last == 1, beta * sizes / n, sizes / n)
    values[sizes <= 1] = 0.0
    return TUGame(n, values, f"nonconvex(n={n}, beta={beta!r})")


def make_museum_game(mat: MuseumMatrix) -> TUGame:
    """v(T) = number of visitors whose museums all lie in T."""
    n = mat.n
    _check_size(n)
    visitor_masks = (mat.a.astype(np.int64) << np.arange(n)).sum(axis=1)
    coalitions = np.arange(1 << n, dtype=np.int64)
    values = np.zeros(1 << n)
    for vm in visitor_masks:
        values += (coalitions & vm) == vm
    return TUGame(n, values, f"museum(n={n}, m={mat.m})")


def make_additive_game(weights) -> TUGame:
    w = np.asarray(weights, dtype=np.float64)
    return TUGame(len(w), coalition_sums(w), f"additive(w={w.tolist()})")


def make_unanimity_game(n: int, carrier: int | None = None) -> TUGame:
    """v(T) = 1 if ``carrier`` is contained in T, else 0 (default carrier: N)."""
    _check_size(n)
    carrier = (1 << n) - 1 if carrier is None else carrier
    coalitions = np.arange(1 << n, dtype=np.int64)
    values = ((coalitions & carrier) == carrier).astype(np.float64)
    values[0] = 0.0
    return TUGame(n, values, f"unanimity(n={n}, carrier={carrier})")


def make_random_superadditive_game(n: int, rng: np.random.Generator,
                                   high: float = 1.0) -> TUGame:
    """Uniform random worths, then raised to the smallest superadditive cover.

    The core of the result may still be empty.
    """
    _check_size(n)
    values = rng.uniform(0.0, high, size=1 << n)
    values[0] = 0.0
    for mask in sorted(range(1, 1 << n), key=lambda m: bin(m).count("1")):
        sub = (mask - 1) & mask
        while sub:
            rest = mask ^ sub
            if sub < rest:  # each split once
                values[mask] = max(values[mask], values[sub] + values[rest])
            sub = (sub - 1) & mask
    return TUGame(n, values, f"random_superadditive(n={n})")


def shapley_value(game: TUGame) -> np.ndarray:
    """Exact Shapley value by the subset formula, O(n 2**n)."""
    n = game.n
    if n > MAX_SHAPLEY_PLAYERS:
        raise CapacityError(
            f"exact Shapley value is limited to n <= {MAX_SHAPLEY_PLAYERS}, got n={n}"
        )
    sizes = coalition_sizes(n)
    weights = np.array(
        [math.factorial(s) * math.factorial(n - s - 1) / math.factorial(n) for s in range(n)]
    )
    coalitions = np.arange(1 << n, dtype=np.int64)
    v = game.values
    phi = np.empty(n)
    for i in range(n):
        without = coalitions[(coalitions >> i & 1) == 0]
        phi[i] = np.dot(weights[sizes[without]], v[without | (1 << i)] - v[without])
    return phi


def save_game(game: TUGame, path) -> None:
    _jsonio.dump({"n": game.n, "label": game.label, "values": game.values.tolist()}, path)


def game_from_dict(data) -> TUGame:
    if not isinstance(data, dict):
        raise GameFormatError("game file must contain a JSON object")
    for key in ("n", "values"):
        if key not in data:
            raise GameFormatError(f"{key}: missing required key")
    n = data["n"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise GameFormatError(f"n: expected an integer, got {n!r}")
    values = data["values"]
    if not isinstance(values, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in values
    ):
        raise GameFormatError("values: expected a list of numbers")
    label = data.get("label", "")
    if not isinstance(label, str):
        raise GameFormatError("label: expected a string")
    return TUGame(n, values, label)


def load_game(path) -> TUGame:
    try:
        data = _jsonio.load(path)
    except ValueError as exc:
        raise GameFormatError(f"{path}: not valid JSON ({exc})") from exc
    return game_from_dict(data)
