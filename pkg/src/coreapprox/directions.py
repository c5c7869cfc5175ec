"""Seeded streams of LP objective directions.

Two schemes are supported:

``det``
    uniform draws (with replacement) from the sign vectors ``{-1, +1}**n``,
    nudged by ``eps * u`` with ``u`` uniform on the unit sphere so the LP
    optimum is generically a unique vertex;
``rand``
    directions uniform on the unit sphere.

Streams are driven by numpy's PCG64 bit generator seeded through
``SeedSequence(seed, spawn_key=(stream,))``, so a ``(seed, stream)`` pair
fixes the whole sequence.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

RNG_ALGORITHM = "numpy.PCG64 via SeedSequence(seed, spawn_key=(stream,))"


class SchemeKind(str, Enum):
    DETERMINISTIC_SIGNS = "det"
    RANDOM_SPHERE = "rand"


@dataclass(frozen=True)
class DirectionScheme:
    kind: SchemeKind = SchemeKind.RANDOM_SPHERE
    seed: int = 0
    perturbation: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "kind", SchemeKind(self.kind))
        if not 0 <= self.perturbation < 1e-3:
            raise ValueError(f"perturbation must lie in [0, 1e-3), got {self.perturbation}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @classmethod
    def parse(cls, spelling: str, seed: int = 0, perturbation: float = 1e-6):
        return cls(SchemeKind(spelling), seed, perturbation)

    @property
    def code(self) -> str:
        return self.kind.value

    def stream(self, n: int, stream: int = 0) -> "DirectionStream":
        return DirectionStream(self, n, stream)


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.PCG64(ss))


def _unit(rng, n):
    while True:
        u = rng.standard_normal(n)
        norm = np.linalg.norm(u)
        if norm >= 1e-12:
            return u / norm


def next_direction(scheme: DirectionScheme, n: int, rng: np.random.Generator) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be positive")
    if scheme.kind is SchemeKind.RANDOM_SPHERE:
        return _unit(rng, n)
    c = rng.integers(0, 2, size=n).astype(np.float64) * 2.0 - 1.0
    if scheme.perturbation > 0:
        c += scheme.perturbation * _unit(rng, n)
    return c


class DirectionStream:
    """Iterator over the directions of one ``(scheme, stream)`` pair."""

    def __init__(self, scheme: DirectionScheme, n: int, stream: int = 0):
        self.scheme = scheme
        self.n = n
        self.rng = make_rng(scheme.seed, stream)

    def __iter__(self):
        return self

    def __next__(self) -> np.ndarray:
        return next_direction(self.scheme, self.n, self.rng)

    def take(self, k: int) -> np.ndarray:
        return np.array([next(self) for _ in range(k)])
