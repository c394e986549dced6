"""Intensity configurations and the composition state space they live in."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Iterator, Sequence

import numpy as np

#: Largest total intensity count accepted anywhere in the package.
MAX_N = 2**31
#: Largest number of compositions we are willing to enumerate.
ENUMERATION_LIMIT = 10**6


class EnumerationGuardError(ValueError):
    """Raised when a state space would exceed :data:`ENUMERATION_LIMIT`."""

    def __init__(self, count: int, limit: int = ENUMERATION_LIMIT):
        self.count = count
        self.limit = limit
        super().__init__(f"state space has {count} compositions, above the enumeration limit of {limit}")


@dataclass(frozen=True)
class IntensityState:
    """Integer intensities ``a_i`` in units of ``eps = 1/N``.

    ``N`` is the sum of the intensities, so normalisation holds by
    construction. Pass ``N`` explicitly to have it checked.
    """

    a: tuple[int, ...]
    N: int = -1

    def __post_init__(self):
        a = tuple(int(x) for x in self.a)
        if not a:
            raise ValueError("intensity vector must be nonempty")
        if any(x < 0 for x in a):
            raise ValueError(f"intensities must be nonnegative, got {a}")
        total = sum(a)
        if total <= 0:
            raise ValueError("total intensity must be positive")
        if total > MAX_N:
            raise ValueError(f"N = {total} exceeds the supported maximum {MAX_N}")
        if self.N != -1 and self.N != total:
            raise ValueError(f"intensities sum to {total}, not N = {self.N}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "N", total)

    @classmethod
    def of(cls, *a: int) -> IntensityState:
        return cls(tuple(a))

    @property
    def M(self) -> int:
        return len(self.a)

    @property
    def eps(self) -> float:
        return 1.0 / self.N

    @property
    def is_pure(self) -> bool:
        return max(self.a) == self.N

    @property
    def support(self) -> tuple[int, ...]:
        """Indices of the nonzero components."""
        return tuple(i for i, x in enumerate(self.a) if x > 0)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.a, dtype=np.int64)

    def __str__(self) -> str:
        return ":".join(str(x) for x in self.a)


def count_compositions(M: int, N: int) -> int:
    """Number of ways to write ``N`` as an ordered sum of ``M`` nonnegative parts."""
    if M < 1 or N < 0:
        raise ValueError("need M >= 1 and N >= 0")
    return comb(N + M - 1, M - 1)


def compositions(M: int, N: int) -> Iterator[tuple[int, ...]]:
    """Yield all compositions of ``N`` into ``M`` parts, lexicographically descending."""
    if M == 1:
        yield (N,)
        return
    for first in range(N, -1, -1):
        for rest in compositions(M - 1, N - first):
            yield (first,) + rest


def composition_rank(states: np.ndarray | Sequence[Sequence[int]], N: int) -> np.ndarray:
    """Ordinal of each composition in the descending lexicographic order.

    Vectorised inverse of :func:`compositions`. For position ``k`` the
    compositions that agree on the prefix but carry more mass at ``k``
    number ``C(R_k - a_k + M-k-2, M-k-1)`` (hockey-stick identity), where
    ``R_k`` is the mass still unassigned before position ``k``.
    """
    states = np.atleast_2d(np.asarray(states, dtype=np.int64))
    M = states.shape[1]
    table = np.array([[comb(n, r) for r in range(M + 1)] for n in range(N + M + 1)], dtype=np.int64)
    rank = np.zeros(states.shape[0], dtype=np.int64)
    remaining = np.full(states.shape[0], N, dtype=np.int64)
    for k in range(M - 1):
        m = M - k - 2
        rank += table[remaining - states[:, k] + m, m + 1]
        remaining -= states[:, k]
    return rank
