from fractions import Fraction

import mpmath
import pytest
from gmpy2 import mpfr
from hypothesis import given, settings, strategies as st

from zetamoments.mpcontext import bits_for_digits, precision
from zetamoments.special import (
    ZetaCache,
    bernoulli_even,
    hyp2f1_at_inverse_prime,
    stieltjes_constants,
    zeta_offset,
    zeta_real,
)


def _rel(a, b):
    return abs((mpfr(a) - mpfr(b)) / mpfr(b))


def test_bernoulli():
    assert bernoulli_even(1) == Fraction(1, 6)
    assert bernoulli_even(2) == Fraction(-1, 30)
    assert bernoulli_even(6) == Fraction(-691, 2730)
    with pytest.raises(ValueError):
        bernoulli_even(0)


def test_zeta_known_values():
    with precision(bits_for_digits(60)):
        z2 = zeta_real(2, 55)
        z4 = zeta_real(4, 55)
        with mpmath.workdps(70):
            assert _rel(z2, mpfr(str(mpmath.pi**2 / 6))) < mpfr(10) ** -55
            assert _rel(z4, mpfr(str(mpmath.pi**4 / 90))) < mpfr(10) ** -55


@settings(max_examples=30, deadline=None)
@given(st.integers(-9, 9).filter(lambda m: m != 0), st.integers(1, 4), st.integers(10, 40))
def test_zeta_offset_against_mpmath(m, b, d):
    with precision(bits_for_digits(3 * d + 20)):
        delta = mpfr(10) ** -d
        got = zeta_offset(b, m * delta)
    # s = b + m*10^-d must hold every digit of the offset, hence the extra d digits
    with mpmath.workdps(4 * d + 60):
        s = mpmath.mpf(b) + m * mpmath.mpf(10) ** -d
        ref = mpmath.zeta(s)
        assert abs((mpmath.mpf(str(got)) - ref) / ref) < mpmath.mpf(10) ** (-(3 * d + 10))


def test_zeta_real_errors():
    with precision(200):
        with pytest.raises(ValueError):
            zeta_real(1)
        with pytest.raises(ValueError):
            zeta_real(-1)
        with pytest.raises(ValueError):
            zeta_real(2, 500)


def test_zeta_cache_keys_and_pole():
    with precision(300):
        delta = mpfr(10) ** -20
        cache = ZetaCache.build(delta, [(1, 1), (-3, 1), (2, 2)])
        assert len(cache) == 3 and (-3, 1) in cache
        # near the pole zeta(1 + m delta) ~ 1/(m delta)
        assert abs(cache[(-3, 1)] * (-3 * delta) - 1) < 1e-18
        with pytest.raises(KeyError):
            cache[(5, 1)]
        with pytest.raises(ValueError):
            cache.add(0, 1)


@pytest.mark.parametrize("a,b,c,p", [(2, 2, 1, 2), (3, 3, 1, 7), (5, 5, 1, 101), (2, 3, 4, 3)])
def test_hyp2f1(a, b, c, p):
    with precision(bits_for_digits(50)):
        got = hyp2f1_at_inverse_prime(a, b, c, p)
    with mpmath.workdps(60):
        ref = mpmath.hyp2f1(a, b, c, mpmath.mpf(1) / p)
        assert abs(mpmath.mpf(str(got)) / ref - 1) < mpmath.mpf(10) ** -48


def test_stieltjes():
    with precision(bits_for_digits(40)):
        st_ = stieltjes_constants(30)
    with mpmath.workdps(50):
        assert abs(mpmath.mpf(str(st_.gamma0)) - mpmath.euler) < mpmath.mpf(10) ** -29
        assert abs(mpmath.mpf(str(st_.gamma1)) - mpmath.stieltjes(1)) < mpmath.mpf(10) ** -29
    with pytest.raises(ValueError):
        stieltjes_constants(20, q=5)
