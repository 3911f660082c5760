"""The sorted-halves permutation set and the integer shift structure it induces.

With shifts ``delta_j = j * delta`` every difference ``z_i - z_{j+k}`` is an
integer multiple of ``delta``, so all caches downstream are keyed by small
integers rather than by high-precision reals.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, List, Tuple

import numpy as np
from gmpy2 import mpfr

MAX_INDEX = 2**63 - 1


@dataclass(frozen=True, order=True)
class HalfPermutation:
    """One sigma: ``first_half`` and ``second_half`` split ``{1..2k}`` into ascending halves."""

    first_half: Tuple[int, ...]
    second_half: Tuple[int, ...]

    def __post_init__(self):
        k = len(self.first_half)
        if len(self.second_half) != k or k == 0:
            raise ValueError("halves must be non-empty and of equal length")
        if sorted(self.first_half + self.second_half) != list(range(1, 2 * k + 1)):
            raise ValueError("halves must partition {1..2k}")
        for half in (self.first_half, self.second_half):
            if any(a >= b for a, b in zip(half, half[1:])):
                raise ValueError("halves must be strictly ascending")

    @property
    def k(self) -> int:
        return len(self.first_half)

    @property
    def s_index(self) -> int:
        """Integer ``n`` with ``S_sigma = n * delta``."""
        return sum(self.first_half) - sum(self.second_half)

    def swapped(self) -> "HalfPermutation":
        return HalfPermutation(self.second_half, self.first_half)

    @classmethod
    def from_first_half(cls, k: int, first) -> "HalfPermutation":
        first = tuple(sorted(first))
        rest = tuple(x for x in range(1, 2 * k + 1) if x not in set(first))
        return cls(first, rest)


def xi_size(k: int) -> int:
    return math.comb(2 * k, k)


def enumerate_xi(k: int) -> List[HalfPermutation]:
    """All ``C(2k, k)`` half-permutations, lexicographic in ``first_half``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if xi_size(k) > MAX_INDEX:
        raise OverflowError(f"C({2 * k},{k}) does not fit a 64-bit index")
    return list(iter_xi(k))


def iter_xi(k: int) -> Iterator[HalfPermutation]:
    full = range(1, 2 * k + 1)
    for first in itertools.combinations(full, k):
        chosen = set(first)
        yield HalfPermutation(first, tuple(x for x in full if x not in chosen))


@dataclass(frozen=True)
class DifferenceTable:
    """``m[i, j] = sigma(i) - sigma(j + k)``; ``z_i - z_{j+k} = m[i, j] * delta``."""

    sigma: HalfPermutation
    m: np.ndarray

    @property
    def possible_values(self) -> List[int]:
        k = self.sigma.k
        return [v for v in range(-(2 * k - 1), 2 * k) if v != 0]


def difference_table(sigma: HalfPermutation) -> DifferenceTable:
    first = np.array(sigma.first_half, dtype=np.int32)
    second = np.array(sigma.second_half, dtype=np.int32)
    m = first[:, None] - second[None, :]
    m.setflags(write=False)
    return DifferenceTable(sigma, m)


@dataclass(frozen=True)
class ShiftVector:
    k: int
    delta: object
    entries: Tuple[object, ...]

    def at(self, j: int):
        """``delta_j`` for 1-based ``j``."""
        return self.entries[j - 1]


def make_shift_vector(k: int, delta) -> ShiftVector:
    delta = mpfr(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    return ShiftVector(k, delta, tuple(j * delta for j in range(1, 2 * k + 1)))
