"""Multiprecision zeta, Gauss hypergeometric series and Stieltjes constants.

``zeta_real`` uses Euler--Maclaurin summation. With cutoff ``N`` and ``M``
Bernoulli corrections the size of the ``j``-th correction is roughly

    2 (2j-1)! / ((2 pi)^(2j) N^(2j))

so taking ``N = 2M`` makes consecutive terms shrink by about ``(2 pi e)^-2``,
i.e. 2.4 decimal digits per term. ``M`` is started at ``D / 2.4`` for ``D``
target digits and the correction loop runs until a term falls below the target
relative error (the Euler--Maclaurin remainder is bounded by the first omitted
term times ``|s + 2M + 1| / (Re s + 2M + 1)``, which is ~1 here).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

import gmpy2
from gmpy2 import mpfr

from .mpcontext import bits_for_digits, current_bits, precision

_BERNOULLI: List[Fraction] = []  # _BERNOULLI[j-1] == B_{2j}


def _tangent_numbers(n: int) -> List[int]:
    # Brent--Harvey: integer-only recurrence for T_1..T_n.
    t = [0] * (n + 1)
    t[1] = 1
    for k in range(2, n + 1):
        t[k] = (k - 1) * t[k - 1]
    for k in range(2, n + 1):
        for j in range(k, n + 1):
            t[j] = (j - k) * t[j - 1] + (j - k + 2) * t[j]
    return t


def bernoulli_even(j: int) -> Fraction:
    """Exact Bernoulli number ``B_{2j}`` for ``j >= 1``."""
    if j < 1:
        raise ValueError("j must be >= 1")
    if j > len(_BERNOULLI):
        n = max(j, 2 * len(_BERNOULLI), 16)
        t = _tangent_numbers(n)
        _BERNOULLI[:] = [
            Fraction((-1) ** (i - 1) * 2 * i * t[i], 4**i * (4**i - 1)) for i in range(1, n + 1)
        ]
    return _BERNOULLI[j - 1]


def _to_mpfr(q: Fraction):
    return mpfr(q.numerator) / mpfr(q.denominator)


def zeta_offset(base: int, offset) -> "mpfr":
    """``zeta(base + offset)`` at the current context precision.

    Keeping the integer part separate lets the pole term use ``(base - 1) + offset``
    without the rounding of ``1 + offset``; this matters when ``offset`` is 10^-D.
    """
    bits = current_bits()
    with precision(bits + 24):
        eps = mpfr(offset)
        s = base + eps
        s_minus_1 = (base - 1) + eps
        if s_minus_1 == 0:
            raise ValueError("zeta has a pole at s = 1")
        result = _euler_maclaurin(s, s_minus_1, bits + 24)
    return +result


def _euler_maclaurin(s, s_minus_1, bits: int):
    target = mpfr(2) ** (-bits)
    digits = bits * math.log10(2)
    m_est = int(digits / 2.4) + 6
    n_cut = max(12, 2 * m_est)
    while True:
        total = mpfr(0)
        for n in range(1, n_cut):
            total += gmpy2.exp(-s * gmpy2.log(n))
        log_n = gmpy2.log(n_cut)
        n_pow = gmpy2.exp(-s * log_n)  # N^-s
        total += n_pow * n_cut / s_minus_1 + n_pow / 2
        inv_n2 = mpfr(1) / (n_cut * n_cut)
        rising = s  # s (s+1) ... (s+2j-2)
        power = n_pow * n_cut  # N^(-s-2j+1), starting at j = 1 below
        fact = mpfr(2)  # (2j)!
        converged = False
        prev = None
        for j in range(1, 4 * m_est + 8):
            power *= inv_n2
            term = _to_mpfr(bernoulli_even(j)) / fact * rising * power
            total += term
            if abs(term) < target * abs(total):
                converged = True
                break
            if prev is not None and abs(term) > abs(prev):
                break
            prev = term
            rising *= (s + 2 * j - 1) * (s + 2 * j)
            fact *= (2 * j + 1) * (2 * j + 2)
        if converged:
            return total
        n_cut *= 2


def zeta_real(s, precision_digits: Optional[int] = None):
    """Riemann zeta at a real ``s`` (``s > 0``, ``s != 1``) to ``precision_digits``.

    The context precision is the working precision; asking for more digits than
    it holds is an error.
    """
    bits = current_bits()
    if precision_digits is not None and bits_for_digits(precision_digits) > bits + 32:
        raise ValueError(
            f"requested {precision_digits} digits exceeds the working precision ({bits} bits)"
        )
    s = mpfr(s)
    if s <= 0:
        raise ValueError("zeta_real needs s > 0")
    if s == 1:
        raise ValueError("zeta has a pole at s = 1")
    base = int(gmpy2.floor(s))
    if base == 0:
        base = 1
    return zeta_offset(base, s - base)


@dataclass
class ZetaCache:
    """Table of ``zeta(b + m*delta)`` keyed by ``(m, b)``.

    Filled once (single writer) and read-only afterwards.
    """

    delta: object
    bits: int
    values: Dict[Tuple[int, int], object] = field(default_factory=dict)

    @classmethod
    def build(cls, delta, keys: Iterable[Tuple[int, int]]) -> "ZetaCache":
        cache = cls(delta=delta, bits=current_bits())
        for key in sorted(set(keys)):
            cache.add(*key)
        return cache

    def add(self, m: int, b: int) -> None:
        if b == 1 and m == 0:
            raise ValueError("key (0, 1) is the pole of zeta")
        if (m, b) not in self.values:
            with precision(self.bits):
                self.values[(m, b)] = zeta_offset(b, m * self.delta)

    def __getitem__(self, key: Tuple[int, int]):
        try:
            return self.values[key]
        except KeyError:
            raise KeyError(f"zeta cache has no entry for (m, b) = {key}") from None

    def __contains__(self, key) -> bool:
        return key in self.values

    def __len__(self) -> int:
        return len(self.values)


def hyp2f1_at_inverse_prime(a: int, b: int, c: int, p: int):
    """``2F1(a, b; c; 1/p)`` by its defining series at the context precision.

    For positive integer parameters the term ratio ``(a+n)(b+n)/((c+n)(n+1)) / p``
    eventually decreases towards ``1/p <= 1/2``, so once it does the tail is
    bounded by ``term * r / (1 - r)``.
    """
    if p < 2:
        raise ValueError("p must be >= 2")
    x = mpfr(1) / p
    eps = mpfr(2) ** (-current_bits())
    term = mpfr(1)
    total = mpfr(1)
    n = 0
    while True:
        ratio = mpfr((a + n) * (b + n)) / ((c + n) * (n + 1)) * x
        term *= ratio
        total += term
        n += 1
        nxt = mpfr((a + n) * (b + n)) / ((c + n) * (n + 1)) * x
        if nxt <= ratio and nxt < 1:
            if term * nxt / (1 - nxt) < eps * total:
                return total


@dataclass(frozen=True)
class StieltjesPair:
    gamma0: object
    gamma1: object


def stieltjes_constants(precision_digits: int, q: Optional[int] = None) -> StieltjesPair:
    """Extract gamma_0 and gamma_1 from ``f(s) = s zeta(1+s)`` at ``s = +-h, +-2h``.

    With ``f(s) = 1 + g0 s - g1 s^2 + g2/2 s^3 - ...`` the combinations

        g0 = (8 (f(h) - f(-h)) - (f(2h) - f(-2h))) / (12 h)
        g1 = -(16 (f(h) + f(-h) - 2) - (f(2h) + f(-2h) - 2)) / (24 h^2)

    are exact up to ``O(h^4)``. ``h = 10^-q`` with ``4q`` above the requested
    digits; the work is done with ``2q`` extra digits to absorb the cancellation.
    The results are returned at the caller's context precision.
    """
    if precision_digits < 1:
        raise ValueError("precision must be positive")
    if q is None:
        q = (precision_digits + 3) // 4 + 2
    if 4 * q <= precision_digits:
        raise ValueError(f"q={q} too small for {precision_digits} digits (need 4q > digits)")
    caller_bits = current_bits()
    internal = bits_for_digits(precision_digits + 2 * q + 15)
    with precision(internal):
        h = mpfr(10) ** (-q)

        def f(x):
            return x * zeta_offset(1, x)

        fp1, fm1 = f(h), f(-h)
        fp2, fm2 = f(2 * h), f(-2 * h)
        g0 = (8 * (fp1 - fm1) - (fp2 - fm2)) / (12 * h)
        g1 = -(16 * (fp1 + fm1 - 2) - (fp2 + fm2 - 2)) / (24 * h * h)
    with precision(caller_bits):
        return StieltjesPair(+g0, +g1)
