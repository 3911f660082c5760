"""The arithmetic factor A_k at the shift points.

Primes ``p <= P`` use the exact finite form of the local factor,

    prod_{i,m} (1 - p^(-1 + z_{i+k} - z_m))
      * sum_j [prod_{i != j} (1 - p^(z_{i+k} - z_{j+k}))]^-1
              [prod_m (1 - p^(-1 + z_{j+k} - z_m))]^-1,

and the primes above ``P`` are approximated by the cubic (or quadratic)
zeta-product accelerant. With ``z_j = sigma(j) * delta`` every exponent is
``-d + n*delta`` for a small integer ``n``, so each prime needs only a short
table of ``p^(n*delta)``.

Accelerant factors. Write ``u`` for the first-half values of sigma and ``v``
for the second-half values. The four families of degree-2/3 factors are
``(1 - p^(-d + m*delta))`` with

    F1  d=2  m = v_a + v_b - u_a - u_b                a<b, a<b
    F2  d=3  m = v_a + v_b + v_c - (u_a + u_b + u_c)  a<b<c both sides
    F3  d=3  m = 2 v_a + v_b - (u_a + u_b + u_c)      a != b on v, a<b<c on u
    F4  d=3  m = v_a + v_b + v_c - (2 u_a + u_b)      a != b on u, a<b<c on v

entering the local-factor approximation with powers +1, -4, -1, -1. Since

    prod_{p > P} (1 - p^-s) = 1 / tau(s),  tau(s) = zeta(s) prod_{p <= P} (1 - p^-s),

the tail is ``prod tau(d - m delta)^(s_f * mult)`` with ``s_f = -1, +4, +1, +1``.
``tau`` does not depend on sigma, so :class:`TauTable` computes it once per run.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import gmpy2
from gmpy2 import mpfr

from .combinatorics import HalfPermutation, ShiftVector, make_shift_vector
from .mpcontext import ConfigError, RunConfig, current_bits, normalize_degree, precision
from .primes import DEFAULT_CEILING, iter_prime_segments, next_prime_at_least, primes_up_to
from .special import ZetaCache

FAMILY_SIGNS = (-1, 4, 1, 1)
FAMILY_DEGREES = (2, 3, 3, 3)
FAMILY_NAMES = ("pairs", "triples", "triple-double", "double-triple")


class ShiftCollision(ArithmeticError):
    """A zero denominator in the local factor: two shifts coincide."""


# ---------------------------------------------------------------------------
# per-prime power tables


@dataclass
class PrimePowerTable:
    """``p^(m delta)`` for ``|m| <= M`` plus ``p^-1, p^-2, p^-3``.

    ``pos[m] = p^(m delta)`` and ``neg[m] = p^(-m delta)``, both built by
    repeated multiplication of ``p^delta`` and its reciprocal.
    """

    p: int
    M: int
    pos: List[object]
    neg: List[object]
    inv: Tuple[object, object, object]

    @classmethod
    def build(cls, p: int, delta, M: int) -> "PrimePowerTable":
        step = gmpy2.exp(delta * gmpy2.log(p))
        back = 1 / step
        pos = [mpfr(1), step]
        neg = [mpfr(1), back]
        for _ in range(2, M + 1):
            pos.append(pos[-1] * step)
            neg.append(neg[-1] * back)
        ip = mpfr(1) / p
        return cls(p, M, pos, neg, (ip, ip * ip, ip * ip * ip))

    def power(self, m: int):
        """``p^(m delta)``."""
        return self.pos[m] if m >= 0 else self.neg[-m]


@dataclass
class LocalFactorTables:
    """Distinct factor values shared by every sigma at one prime.

    ``a[n] = 1 - p^(-1 + n delta)`` and ``binv[n] = 1 / (1 - p^(n delta))`` for
    ``|n| <= 2k - 1`` (``binv`` only for ``n != 0``), stored at offset ``2k - 1``.
    """

    k: int
    a: List[object]
    binv: List[Optional[object]]

    @classmethod
    def build(cls, k: int, powers: PrimePowerTable) -> "LocalFactorTables":
        span = 2 * k - 1
        ip = powers.inv[0]
        a = [1 - ip * powers.power(n) for n in range(-span, span + 1)]
        binv: List[Optional[object]] = [None] * (2 * span + 1)
        for n in range(-span, span + 1):
            if n:
                binv[n + span] = 1 / (1 - powers.power(n))
        return cls(k, a, binv)


@dataclass(frozen=True)
class SigmaLayout:
    """Integer index lists that let :func:`local_factor_from_tables` run on table lookups."""

    k: int
    alpha_idx: Tuple[Tuple[int, ...], ...]  # per second-half i: offsets v_i - u_m + span
    binv_idx: Tuple[Tuple[int, ...], ...]  # per j: offsets v_i - v_j + span, i != j

    @classmethod
    def of(cls, sigma: HalfPermutation) -> "SigmaLayout":
        k = sigma.k
        span = 2 * k - 1
        u, v = sigma.first_half, sigma.second_half
        alpha_idx = tuple(tuple(vi - um + span for um in u) for vi in v)
        binv_idx = tuple(tuple(v[i] - v[j] + span for i in range(k) if i != j) for j in range(k))
        return cls(k, alpha_idx, binv_idx)


def local_factor_from_tables(layout: SigmaLayout, tables: LocalFactorTables):
    k = layout.k
    if k == 1:
        return mpfr(1)
    a, binv = tables.a, tables.binv
    alphas = []
    for idx in layout.alpha_idx:
        it = iter(idx)
        acc = a[next(it)]
        for n in it:
            acc = acc * a[n]
        alphas.append(acc)
    # prefix[j] * suffix[j] = prod_{i != j} alpha_i without a division
    prefix = [None] * k
    run = alphas[0]
    prefix[1] = run
    for j in range(2, k):
        run = run * alphas[j - 1]
        prefix[j] = run
    total = None
    run = None
    for j in range(k - 1, -1, -1):
        if j == k - 1:
            others = prefix[j]
        elif j == 0:
            others = run
        else:
            others = prefix[j] * run
        for n in layout.binv_idx[j]:
            others = others * binv[n]
        total = others if total is None else total + others
        run = alphas[j] if run is None else run * alphas[j]
    return total


def local_factor(p: int, sigma: HalfPermutation, shifts: ShiftVector, powers: Optional[PrimePowerTable] = None):
    """Exact local factor of A_k at ``p`` and ``z_j = delta_{sigma(j)}``."""
    k = sigma.k
    if shifts.k != k:
        raise ValueError("shift vector and sigma disagree on k")
    if len(set(shifts.entries)) != len(shifts.entries):
        raise ShiftCollision("shift entries must be pairwise distinct")
    if powers is None:
        powers = PrimePowerTable.build(p, shifts.delta, 2 * k)
    try:
        tables = LocalFactorTables.build(k, powers)
    except ZeroDivisionError as exc:  # pragma: no cover - only with delta == 0
        raise ShiftCollision(str(exc)) from exc
    if any(b is not None and gmpy2.is_infinite(b) for b in tables.binv):
        raise ShiftCollision(f"zero denominator at p={p}")
    return local_factor_from_tables(SigmaLayout.of(sigma), tables)


# ---------------------------------------------------------------------------
# accelerant multiplicities


@dataclass(frozen=True)
class ExponentMultiset:
    """``m -> multiplicity`` for one accelerant family and one sigma."""

    family: str
    degree: int
    sign: int
    counts: Tuple[Tuple[int, int], ...]

    @property
    def total(self) -> int:
        return sum(c for _, c in self.counts)

    def as_dict(self) -> Dict[int, int]:
        return dict(self.counts)

    @staticmethod
    def expected_total(family_index: int, k: int) -> int:
        c2, c3, pairs = math.comb(k, 2), math.comb(k, 3), k * (k - 1)
        return (c2 * c2, c3 * c3, c3 * pairs, pairs * c3)[family_index]


def _subset_sums(values: Sequence[int], size: int) -> Counter:
    return Counter(sum(c) for c in itertools.combinations(values, size))


def _weighted_pair_sums(values: Sequence[int]) -> Counter:
    return Counter(2 * a + b for a, b in itertools.permutations(values, 2))


def _convolve(plus: Counter, minus: Counter) -> Tuple[Tuple[int, int], ...]:
    out: Counter = Counter()
    for s, cs in plus.items():
        for t, ct in minus.items():
            out[s - t] += cs * ct
    return tuple(sorted(out.items()))


def count_accelerant_multiplicities(sigma: HalfPermutation, k: Optional[int] = None) -> Tuple[ExponentMultiset, ...]:
    """Multiplicities of the four accelerant families for ``sigma``.

    Counts are obtained by convolving the distributions of subset sums of the two
    halves, which gives the same integers as looping over every index tuple.
    """
    k = sigma.k if k is None else k
    if k != sigma.k:
        raise ValueError("k does not match sigma")
    u, v = sigma.first_half, sigma.second_half
    parts = (
        (_subset_sums(v, 2), _subset_sums(u, 2)),
        (_subset_sums(v, 3), _subset_sums(u, 3)),
        (_weighted_pair_sums(v), _subset_sums(u, 3)),
        (_subset_sums(v, 3), _weighted_pair_sums(u)),
    )
    return tuple(
        ExponentMultiset(FAMILY_NAMES[f], FAMILY_DEGREES[f], FAMILY_SIGNS[f], _convolve(*parts[f]))
        for f in range(4)
    )


def count_accelerant_multiplicities_bruteforce(sigma: HalfPermutation) -> Tuple[ExponentMultiset, ...]:
    """Reference O(k^6) loop over every index tuple of the four families."""
    k = sigma.k
    u, v = sigma.first_half, sigma.second_half
    rk = range(k)
    counters = [Counter() for _ in range(4)]
    for i1, i2 in itertools.product(rk, rk):
        for j1, j2 in itertools.product(rk, rk):
            if i1 < i2 and j1 < j2:
                counters[0][v[j1] + v[j2] - u[i1] - u[i2]] += 1
    for i1, i2, i3 in itertools.product(rk, rk, rk):
        for j1, j2, j3 in itertools.product(rk, rk, rk):
            if i1 < i2 < i3 and j1 < j2 < j3:
                counters[1][v[j1] + v[j2] + v[j3] - u[i1] - u[i2] - u[i3]] += 1
        for j1, j2 in itertools.product(rk, rk):
            if i1 < i2 < i3 and j1 != j2:
                counters[2][2 * v[j1] + v[j2] - u[i1] - u[i2] - u[i3]] += 1
    for i1, i2 in itertools.product(rk, rk):
        for j1, j2, j3 in itertools.product(rk, rk, rk):
            if i1 != i2 and j1 < j2 < j3:
                counters[3][v[j1] + v[j2] + v[j3] - 2 * u[i1] - u[i2]] += 1
    out = []
    for f in range(4):
        counts = tuple(sorted((m, c) for m, c in counters[f].items() if c))
        out.append(ExponentMultiset(FAMILY_NAMES[f], FAMILY_DEGREES[f], FAMILY_SIGNS[f], counts))
    return tuple(out)


def families_for_degree(degree) -> Tuple[int, ...]:
    degree = normalize_degree(degree)
    return {"none": (), "2": (0,), "3": (0, 1, 2, 3)}[degree]


def tail_exponents(multisets: Sequence[ExponentMultiset], degree) -> Dict[Tuple[int, int], int]:
    """Combined exponent of ``tau(d - m delta)`` keyed by ``(d, m)``, zeros dropped."""
    out: Counter = Counter()
    for f in families_for_degree(degree):
        ms = multisets[f]
        for m, c in ms.counts:
            out[(ms.degree, m)] += ms.sign * c
    return {key: e for key, e in sorted(out.items()) if e}


def accelerant_keys(k: int, degree) -> List[Tuple[int, int]]:
    """Every ``(d, m)`` any sigma can need; small enough to enumerate over Xi lazily."""
    fams = families_for_degree(degree)
    if not fams or k < 2:
        return []
    keys = set()
    for first in itertools.combinations(range(1, 2 * k + 1), k):
        sigma = HalfPermutation.from_first_half(k, first)
        for f in fams:
            ms = count_accelerant_multiplicities(sigma)[f]
            keys.update((ms.degree, m) for m, _ in ms.counts)
    return sorted(keys)


# ---------------------------------------------------------------------------
# the tail


@dataclass
class TauTable:
    """``tau(d, m) = zeta(d - m delta) * prod_{p <= P} (1 - p^(-d + m delta))``.

    ``partial`` holds the running prime products; :meth:`finish` multiplies in the
    zeta values. Snapshots at several ``P`` can be taken in one pass.
    """

    keys: Tuple[Tuple[int, int], ...]
    partial: Dict[Tuple[int, int], object] = field(default_factory=dict)
    last_prime: int = 1

    @classmethod
    def start(cls, keys: Iterable[Tuple[int, int]]) -> "TauTable":
        keys = tuple(sorted(set(keys)))
        return cls(keys, {key: mpfr(1) for key in keys})

    def update(self, powers: PrimePowerTable) -> None:
        for d, m in self.keys:
            self.partial[(d, m)] *= 1 - powers.inv[d - 1] * powers.power(m)
        self.last_prime = powers.p

    def finish(self, zetas: ZetaCache) -> Dict[Tuple[int, int], object]:
        return {(d, m): zetas[(-m, d)] * self.partial[(d, m)] for d, m in self.keys}


def tail_from_tau(exponents: Dict[Tuple[int, int], int], tau: Dict[Tuple[int, int], object]):
    """``prod tau^e`` with integer powers (MPFR ``pow`` by repeated squaring)."""
    out = mpfr(1)
    for key, e in exponents.items():
        out *= tau[key] ** e
    return out


def build_accelerant_zetas(keys: Iterable[Tuple[int, int]], delta) -> ZetaCache:
    return ZetaCache.build(delta, [(-m, d) for d, m in keys])


def accelerant_tail(
    sigma: HalfPermutation,
    shifts: ShiftVector,
    P: int,
    multisets: Sequence[ExponentMultiset],
    zetas: ZetaCache,
    prime_list: Optional[Sequence[int]] = None,
    degree="3",
):
    """Right-hand side of the accelerant for one sigma (reference path).

    ``zetas`` must hold ``zeta(d - m delta)`` under key ``(-m, d)`` for every
    factor that occurs.
    """
    fams = families_for_degree(degree)
    if not fams or sigma.k < 2:
        return mpfr(1)
    exps = tail_exponents(multisets, degree)
    for d, m in exps:
        if (-m, d) not in zetas:
            raise KeyError(f"zeta cache has no entry for (m, b) = {(-m, d)}")
    table = TauTable.start(exps.keys())
    if prime_list is None:
        prime_list = primes_up_to(P)
    M = max((abs(m) for _, m in exps), default=0)
    for p in prime_list:
        p = int(p)
        if p > P:
            break
        table.update(PrimePowerTable.build(p, shifts.delta, M))
    return tail_from_tau(exps, table.finish(zetas))


# ---------------------------------------------------------------------------
# A_k for a single sigma, error model, choice of P


@dataclass(frozen=True)
class EulerProductResult:
    value: object
    P: int
    degree: str
    tail_error: float


def evaluate_A_k(sigma: HalfPermutation, shifts: ShiftVector, config: RunConfig) -> EulerProductResult:
    """Truncated product times accelerant tail for one sigma (no cross-sigma sharing)."""
    k = sigma.k
    P = config.truncation_prime
    with config.context():
        delta = config.delta
        if shifts.delta != delta:
            shifts = make_shift_vector(k, delta)
        err = float(estimate_tail_error(k, P, delta, config.accelerant_degree))
        if k == 1:
            return EulerProductResult(mpfr(1), P, config.accelerant_degree, err)
        layout = SigmaLayout.of(sigma)
        multisets = count_accelerant_multiplicities(sigma)
        exps = tail_exponents(multisets, config.accelerant_degree)
        M = max([2 * k] + [abs(m) for _, m in exps])
        tau = TauTable.start(exps.keys())
        acc = mpfr(1)
        for seg in iter_prime_segments(2, P):
            for p in seg:
                powers = PrimePowerTable.build(int(p), delta, M)
                acc *= local_factor_from_tables(layout, LocalFactorTables.build(k, powers))
                tau.update(powers)
        zetas = build_accelerant_zetas(exps.keys(), delta)
        value = acc * tail_from_tau(exps, tau.finish(zetas))
    return EulerProductResult(value, P, config.accelerant_degree, err)


def estimate_tail_error(k: int, P: int, delta, degree="3"):
    """Relative tail error bound of the truncated, accelerated Euler product.

    Degree 3: ``k^8 P^(-3 + 8k delta) / ((3 - 8k delta) ln P)``; degree ``d`` in
    general uses ``k^(2d+2) P^(-d + 2(d+1) k delta) / ((d - 2(d+1) k delta) ln P)``
    with ``d = 0`` meaning no accelerant (the first omitted terms are of
    degree ``d+1`` in ``1/p``).
    """
    degree = normalize_degree(degree)
    d = {"none": 1, "2": 2, "3": 3}[degree]
    delta = mpfr(delta)
    slope = 2 * (d + 1) * k * delta
    if degree == "3" and not 8 * k * delta < 3:
        raise ConfigError("estimate requires 8*k*delta < 3")
    if not slope < d:
        raise ConfigError(f"estimate requires {2 * (d + 1)}*k*delta < {d}")
    P = mpfr(P)
    return mpfr(k) ** (2 * d + 2) * P ** (-d + slope) / ((d - slope) * gmpy2.log(P))


def choose_truncation_P(k: int, digits: int, safety: float = 1.0, ceiling: int = DEFAULT_CEILING) -> int:
    """Smallest prime at least ``safety * k^(8/3) * 10^(digits/3)``."""
    if safety <= 0:
        raise ConfigError("safety must be positive")
    target = safety * k ** (8 / 3) * 10 ** (digits / 3)
    if target > ceiling:
        raise ConfigError(
            f"truncation target {target:.3g} exceeds the prime ceiling {ceiling:.0e}; lower digits or safety"
        )
    return next_prime_at_least(target)


# ---------------------------------------------------------------------------
# Maclaurin analysis of the local factor

MACLAURIN_MONOMIALS = (
    ("u1 w1", (1, 0, 0), (1, 0, 0)),
    ("u1 u2 w1 w2", (1, 1, 0), (1, 1, 0)),
    ("u1 u2 w1^2", (1, 1, 0), (2, 0, 0)),
    ("u1^2 w1^2", (2, 0, 0), (2, 0, 0)),
    ("u1 u2 u3 w1 w2 w3", (1, 1, 1), (1, 1, 1)),
    ("u1 u2 u3 w1^2 w2", (1, 1, 1), (2, 1, 0)),
    ("u1 u2 u3 w1^3", (1, 1, 1), (3, 0, 0)),
    ("u1^2 u2 w1^2 w2", (2, 1, 0), (2, 1, 0)),
    ("u1^2 u2 w1^3", (2, 1, 0), (3, 0, 0)),
    ("u1^3 w1^3", (3, 0, 0), (3, 0, 0)),
)


def _poly_mul(a: Dict[tuple, int], b: Dict[tuple, int], max_degree: int) -> Dict[tuple, int]:
    out: Counter = Counter()
    for ea, ca in a.items():
        da = sum(ea)
        for eb, cb in b.items():
            if da + sum(eb) <= max_degree:
                out[tuple(x + y for x, y in zip(ea, eb))] += ca * cb
    return {e: c for e, c in out.items() if c}


def maclaurin_table_check(max_degree: int = 6) -> List[Tuple[str, int]]:
    """Coefficients of the ten representative monomials of the degree-6 expansion.

    Expands ``prod_{l,j<=3} (1 - u_l w_j) * prod_j (1+u_j+u_j^2+u_j^3)(1+w_j+w_j^2+w_j^3)``
    exactly in integers (variables ordered ``u1 u2 u3 w1 w2 w3``), dropping
    monomials above ``max_degree`` since none of them can feed a lower one.
    """

    def unit(i, power):
        e = [0] * 6
        e[i] = power
        return tuple(e)

    poly = {(0,) * 6: 1}
    for l in range(3):
        for j in range(3):
            e = [0] * 6
            e[l] = e[3 + j] = 1
            poly = _poly_mul(poly, {(0,) * 6: 1, tuple(e): -1}, max_degree)
    for i in range(6):
        poly = _poly_mul(poly, {unit(i, n): 1 for n in range(4)}, max_degree)
    return [(name, poly.get(tuple(u) + tuple(w), 0)) for name, u, w in MACLAURIN_MONOMIALS]


def h_m_coefficient(m: int, k: int) -> int:
    """Coefficient of ``x^m`` in ``(1 + x^2)^(k^2) (1 - x)^(-2k)``."""
    if m < 0:
        raise ValueError("m must be >= 0")
    total = 0
    for j in range(m // 2 + 1):
        n = m - 2 * j
        total += math.comb(k * k, j) * math.comb(2 * k + n - 1, n)
    return total
