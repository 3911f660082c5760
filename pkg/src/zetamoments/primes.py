"""Prime generation: a plain sieve for small limits and a segmented one above."""

from __future__ import annotations

import math
from typing import Iterator

import gmpy2
import numpy as np

SEGMENT_THRESHOLD = 10**7
DEFAULT_SEGMENT = 2**22
DEFAULT_CEILING = 10**9


class SieveCeilingError(ValueError):
    pass


def is_prime(n: int) -> bool:
    return n >= 2 and bool(gmpy2.is_prime(n))


def next_prime_at_least(x) -> int:
    n = max(2, int(math.ceil(x)))
    return n if is_prime(n) else int(gmpy2.next_prime(n))


def prev_prime_below(x) -> int:
    """Largest prime strictly less than ``x``."""
    n = int(math.ceil(x)) - 1
    while n >= 2:
        if is_prime(n):
            return n
        n -= 1
    raise ValueError(f"no prime below {x}")


def _base_sieve(limit: int) -> np.ndarray:
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for i in range(3, math.isqrt(limit) + 1, 2):
        if flags[i]:
            flags[i * i :: 2 * i] = False
    return np.flatnonzero(flags).astype(np.int64)


def iter_prime_segments(lo: int, hi: int, segment: int = DEFAULT_SEGMENT) -> Iterator[np.ndarray]:
    """Yield ascending arrays of the primes in ``[lo, hi]``, one segment at a time."""
    lo = max(lo, 2)
    if hi < lo:
        return
    base = _base_sieve(math.isqrt(hi))
    start = lo
    while start <= hi:
        stop = min(hi, start + segment - 1)
        flags = np.ones(stop - start + 1, dtype=bool)
        for p in base:
            p = int(p)
            if p * p > stop:
                break
            first = max(p * p, ((start + p - 1) // p) * p)
            flags[first - start :: p] = False
        if start <= 1:
            flags[: 2 - start] = False
        yield np.flatnonzero(flags).astype(np.int64) + start
        start = stop + 1


def primes_up_to(limit: int, ceiling: int = DEFAULT_CEILING) -> np.ndarray:
    """All primes ``<= limit`` as an int64 array."""
    if limit > ceiling:
        raise SieveCeilingError(f"prime limit {limit} exceeds the sieve ceiling {ceiling}")
    if limit <= SEGMENT_THRESHOLD:
        return _base_sieve(limit)
    return np.concatenate(list(iter_prime_segments(2, limit)))
