"""c_0, c_1, c_2 from explicit prime sums, as an independent check of the engine.

Plain truncation of these sums at ``Q`` leaves errors of order ``k^4/Q`` (or
``log Q / Q``), which is far from the 12 digits the cross-check needs, so the
tail ``p > Q`` is summed with zeta values instead:

* the a_k local factor ``f(x) = (1-x)^(k^2) 2F1(k,k;1;x)`` has integer Maclaurin
  coefficients and factors formally as ``prod_n (1 - x^n)^(e_n)``; with
  ``tau_n = zeta(n) prod_{p<=Q} (1 - p^-n)`` the tail is ``prod_n tau_n^(-e_n)``;
* a prime sum ``sum_p log p g(1/p)`` with ``g = sum_n b_n x^n/(1-x^n)`` has
  ``sum_p log p x^n/(1-x^n) = -zeta'/zeta(n)``, and with ``x^n/(1-x^n)^2`` in
  place of ``x^n/(1-x^n)`` a ``log^2 p`` weight gives ``(zeta'/zeta)'(n)``.

Only the first ``M`` terms of each expansion are used; what is left is
``O(Q^-M)`` and is reported, not added.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import gmpy2
import mpmath
from gmpy2 import mpfr

from .mpcontext import bits_for_digits, precision
from .primes import iter_prime_segments
from .special import hyp2f1_at_inverse_prime, stieltjes_constants

DEFAULT_Q = 10**6
DEFAULT_ORDER = 10
DEFAULT_DIGITS = 40


# ---------------------------------------------------------------------------
# exact power series in x = 1/p


def _hyp_series(a: int, b: int, c: int, order: int) -> List[Fraction]:
    out = [Fraction(1)]
    for n in range(order):
        out.append(out[-1] * Fraction((a + n) * (b + n), (c + n) * (n + 1)))
    return out


def _mul(a: Sequence[Fraction], b: Sequence[Fraction], order: int) -> List[Fraction]:
    out = [Fraction(0)] * (order + 1)
    for i, x in enumerate(a[: order + 1]):
        if x:
            for j, y in enumerate(b[: order + 1 - i]):
                out[i + j] += x * y
    return out


def _inv(a: Sequence[Fraction], order: int) -> List[Fraction]:
    out = [Fraction(0)] * (order + 1)
    out[0] = 1 / a[0]
    for n in range(1, order + 1):
        out[n] = -sum(a[j] * out[n - j] for j in range(1, min(n, len(a) - 1) + 1)) / a[0]
    return out


def _scale(a, s):
    return [s * x for x in a]


def _add(*series):
    n = max(len(s) for s in series)
    return [sum((s[i] for s in series if i < len(s)), Fraction(0)) for i in range(n)]


def _shift(a, by: int, order: int):
    return ([Fraction(0)] * by + list(a))[: order + 1]


def _geometric(power: int, order: int) -> List[Fraction]:
    """Series of ``x/(1-x)^power``."""
    return [Fraction(0)] + [Fraction(math.comb(n - 1 + power - 1, power - 1)) for n in range(1, order + 1)]


def local_factor_exponents(k: int, order: int) -> Dict[int, int]:
    """``e_n`` with ``(1-x)^(k^2) 2F1(k,k;1;x) = prod_n (1 - x^n)^(e_n) + O(x^(order+1))``."""
    f = _mul([Fraction((-1) ** j * math.comb(k * k, j)) for j in range(k * k + 1)], _hyp_series(k, k, 1, order), order)
    if f[0] != 1:
        raise ArithmeticError("local factor must start at 1")
    # log f = sum_n e_n log(1 - x^n): match coefficients of x f'/f
    xdlog = _mul([n * c for n, c in enumerate(f)], _inv(f, order), order)
    exps: Dict[int, int] = {}
    for m in range(1, order + 1):
        # x d/dx log(1 - x^n) = -sum_j n x^(nj)
        acc = xdlog[m] + sum(n * exps[n] for n in exps if m % n == 0)
        e = -acc / m
        if e.denominator != 1:
            raise ArithmeticError("non-integral exponent in local factor factorisation")
        if e:
            exps[m] = int(e)
    return exps


def _lambert_coefficients(g: Sequence[Fraction], weight: int) -> Dict[int, Fraction]:
    """``b_n`` with ``g = sum_n b_n x^n / (1 - x^n)^weight``, weight 1 or 2."""
    b: Dict[int, Fraction] = {}
    for m in range(1, len(g)):
        acc = g[m]
        for n, bn in b.items():
            if m % n == 0:
                acc -= bn * (m // n if weight == 2 else 1)
        if acc:
            b[m] = acc
    return b


@dataclass(frozen=True)
class BkSeries:
    """Exact expansions of the four B_k brackets (without the log weights)."""

    b1: List[Fraction]
    b11: List[Fraction]
    b1_1: List[Fraction]
    b2: List[Fraction]


def bk_series(k: int, order: int) -> BkSeries:
    F0 = _hyp_series(k, k, 1, order)
    F1 = _hyp_series(k + 1, k + 1, 2, order)
    F2 = _hyp_series(k + 2, k + 2, 3, order)
    F11 = _hyp_series(k + 1, k + 1, 1, order)
    F21 = _hyp_series(k + 2, k + 1, 2, order)
    inv0 = _inv(F0, order)
    r1 = _mul(F1, inv0, order)
    r1sq = _mul(r1, r1, order)
    r2 = _mul(F2, inv0, order)
    r11 = _mul(F11, inv0, order)
    r21 = _mul(F21, inv0, order)
    g1, g2 = _geometric(1, order), _geometric(2, order)
    kk = Fraction(k)
    c2 = Fraction(math.comb(k + 1, 2))
    sq = _scale(_shift(r1sq, 2, order), kk * kk)  # k^2 x^2 F1^2/F0^2
    half = _scale(_shift(r2, 2, order), c2)  # C(k+1,2) x^2 F2/F0
    b1 = _add(_scale(g1, kk), _scale(_shift(r1, 1, order), -kk))
    b11 = _scale(_add(sq, _scale(half, -1)), -1)
    b1_1 = _add(g2, sq, _scale(_shift(r11, 1, order), -1))
    b2 = _scale(_add(_scale(g2, kk), sq, _scale(half, -1), _scale(_shift(r21, 1, order), -kk)), -1)
    return BkSeries(b1, b11, b1_1, b2)


# ---------------------------------------------------------------------------
# zeta data for the tails


def _zeta_log_derivatives(order: int, digits: int) -> Tuple[Dict[int, object], Dict[int, object]]:
    """``-zeta'/zeta(n)`` and ``(zeta'/zeta)'(n)`` for ``2 <= n <= order``."""
    with mpmath.workdps(digits + 10):
        first, second = {}, {}
        for n in range(2, order + 1):
            z = mpmath.zeta(n)
            z1 = mpmath.zeta(n, derivative=1)
            z2 = mpmath.zeta(n, derivative=2)
            first[n] = mpfr(mpmath.nstr(-z1 / z, digits + 8, strip_zeros=False))
            second[n] = mpfr(mpmath.nstr(z2 / z - (z1 / z) ** 2, digits + 8, strip_zeros=False))
    return first, second


def _zeta_values(ns: Sequence[int], digits: int) -> Dict[int, object]:
    with mpmath.workdps(digits + 10):
        return {n: mpfr(mpmath.nstr(mpmath.zeta(n), digits + 8, strip_zeros=False)) for n in ns}


# ---------------------------------------------------------------------------
# the prime sums


@dataclass(frozen=True)
class BkValues:
    b1: object
    b11: object
    b1_1: object
    b2: object
    Q: int
    last_terms: Tuple[float, float, float, float]
    tail_bound: float


def _bracket_values(k: int, p: int):
    """The four bracketed quantities at ``p`` (log weights not applied)."""
    x = mpfr(1) / p
    F0 = hyp2f1_at_inverse_prime(k, k, 1, p)
    F1 = hyp2f1_at_inverse_prime(k + 1, k + 1, 2, p)
    F2 = hyp2f1_at_inverse_prime(k + 2, k + 2, 3, p)
    F11 = hyp2f1_at_inverse_prime(k + 1, k + 1, 1, p)
    F21 = hyp2f1_at_inverse_prime(k + 2, k + 1, 2, p)
    sq = (k * x * F1 / F0) ** 2
    half = math.comb(k + 1, 2) * x * x * F2 / F0
    pm1 = mpfr(p - 1)
    g1 = 1 / pm1
    g2 = p / (pm1 * pm1)
    b1 = k * g1 - k * x * F1 / F0
    b11 = -(sq - half)
    b1_1 = g2 + sq - x * F11 / F0
    b2 = -(k * g2 + sq - half - k * x * F21 / F0)
    return F0, (b1, b11, b1_1, b2)


def _prime_sums(k: int, Q: int, order: int, accelerate: bool, weights1: Sequence[int], weights2: Sequence[int], exps: Dict[int, int]):
    """Sums over ``p <= Q``: ``log`` of the a_k product, the four brackets and the Lambert partial sums."""
    log_f = mpfr(0)
    sums = [mpfr(0)] * 4
    psi = {n: mpfr(0) for n in weights1}
    phi = {n: mpfr(0) for n in weights2}
    tau = {n: mpfr(0) for n in exps}  # sum_p log(1 - p^-n)
    last = (0.0,) * 4
    for seg in iter_prime_segments(2, Q):
        for p in seg.tolist():
            F0, br = _bracket_values(k, p)
            lp = gmpy2.log(p)
            lp2 = lp * lp
            x = mpfr(1) / p
            log_f += k * k * gmpy2.log1p(-x) + gmpy2.log(F0)
            terms = (lp * br[0], lp2 * br[1], lp2 * br[2], lp2 * br[3])
            for i in range(4):
                sums[i] += terms[i]
            last = tuple(float(t) for t in terms)
            if accelerate:
                for n in psi:
                    xn = x**n
                    psi[n] += lp * xn / (1 - xn)
                for n in phi:
                    xn = x**n
                    phi[n] += lp2 * xn / ((1 - xn) * (1 - xn))
                for n in tau:
                    tau[n] += gmpy2.log1p(-(x**n))
    return log_f, sums, psi, phi, tau, last


def _work_bits(digits: int) -> int:
    return bits_for_digits(digits)


def euler_a_k(k: int, Q: int = DEFAULT_Q, accelerate: bool = True, order: int = DEFAULT_ORDER, digits: int = DEFAULT_DIGITS):
    """``a_k = prod_p (1 - 1/p)^(k^2) 2F1(k,k;1;1/p)`` with the zeta-product tail."""
    return _method1(k, Q, accelerate, order, digits).a_k


def compute_Bk(k: int, Q: int = DEFAULT_Q, accelerate: bool = True, order: int = DEFAULT_ORDER, digits: int = DEFAULT_DIGITS) -> BkValues:
    return _method1(k, Q, accelerate, order, digits).bk


@dataclass(frozen=True)
class Method1Result:
    k: int
    Q: int
    a_k: object
    bk: BkValues
    gamma0: object
    gamma1: object
    a_k_tail_bound: float

    @property
    def coefficients(self) -> Tuple[object, object, object]:
        with precision(self.a_k.precision):
            return method1_from_parts(self.k, self.a_k, self.bk, self.gamma0, self.gamma1)


def method1_from_parts(k: int, a_k, bk: BkValues, gamma0, gamma1):
    num = 1
    den = 1
    for j in range(k):
        num *= math.factorial(j)
        den *= math.factorial(j + k)
    c0 = a_k * num / den
    s = bk.b1 + gamma0 * k
    c1 = c0 * 2 * k * k * s
    c2 = c0 * k * k * (k - 1) * (k + 1) * (2 * s * s - gamma0 * gamma0 - 2 * gamma1 + bk.b11 - bk.b1_1)
    return c0, c1, c2


_CACHE: Dict[Tuple, Method1Result] = {}


def _method1(k: int, Q: int, accelerate: bool, order: int, digits: int) -> Method1Result:
    if k < 1:
        raise ValueError("k must be >= 1")
    if Q < 2:
        raise ValueError("Q must be >= 2")
    key = (k, Q, accelerate, order, digits)
    if key in _CACHE:
        return _CACHE[key]
    with precision(_work_bits(digits)):
        exps = local_factor_exponents(k, order) if accelerate else {}
        series = bk_series(k, order)
        lam1 = _lambert_coefficients(series.b1, 1) if accelerate else {}
        lam2 = [_lambert_coefficients(s, 2) if accelerate else {} for s in (series.b11, series.b1_1, series.b2)]
        w2 = sorted({n for lam in lam2 for n in lam})
        log_f, sums, psi, phi, tau_log, last = _prime_sums(k, Q, order, accelerate, sorted(lam1), w2, exps)
        a_k = gmpy2.exp(log_f)
        tail_bound = 0.0
        if accelerate:
            d1, d2 = _zeta_log_derivatives(order, digits)
            zetas = _zeta_values(sorted(exps), digits)
            for n, e in exps.items():
                # tau_n = zeta(n) prod_{p<=Q}(1 - p^-n); a_k picks up tau_n^(-e_n)
                a_k *= gmpy2.exp(-e * (gmpy2.log(zetas[n]) + tau_log[n]))
            sums[0] += sum((b * (d1[n] - psi[n]) for n, b in lam1.items()), mpfr(0))
            for i, lam in enumerate(lam2, start=1):
                sums[i] += sum((b * (d2[n] - phi[n]) for n, b in lam.items()), mpfr(0))
            tail_bound = float(mpfr(Q) ** (-order) * (4 * k * k) ** (order + 1))
        bk = BkValues(sums[0], sums[1], sums[2], sums[3], Q, last, tail_bound)
        st = stieltjes_constants(digits)
        res = Method1Result(k, Q, a_k, bk, st.gamma0, st.gamma1, tail_bound)
    _CACHE[key] = res
    return res


def method1_coefficients(k: int, Q: int = DEFAULT_Q, accelerate: bool = True, order: int = DEFAULT_ORDER, digits: int = DEFAULT_DIGITS):
    """``(c_0, c_1, c_2)`` for moment order ``k``."""
    return _method1(k, Q, accelerate, order, digits).coefficients
