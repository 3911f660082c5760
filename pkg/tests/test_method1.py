import gmpy2
import pytest
from gmpy2 import mpfr

from zetamoments.engine import matched_digits
from zetamoments.method1 import (
    bk_series,
    euler_a_k,
    local_factor_exponents,
    method1_coefficients,
)
from zetamoments.mpcontext import precision


def test_k1_coefficients():
    c0, c1, c2 = method1_coefficients(1, Q=1000, digits=30)
    with precision(200):
        assert matched_digits(c0, mpfr(1), 30) >= 25
        # c_2 multiplies (k - 1) and so vanishes at k = 1
        assert c2 == 0


def test_k2_c0():
    c0, _, _ = method1_coefficients(2, Q=1000, digits=30)
    with precision(200):
        assert matched_digits(c0, 1 / (2 * gmpy2.const_pi() ** 2), 30) >= 20


def test_acceleration_changes_nothing_but_speed():
    a = method1_coefficients(3, Q=20000, accelerate=False, digits=30)
    b = method1_coefficients(3, Q=1000, accelerate=True, digits=30)
    with precision(200):
        # unaccelerated Q=2e4 keeps an O(1/Q) tail
        assert matched_digits(a[0], b[0], 30) >= 4


def test_q_independence_when_accelerated():
    a = method1_coefficients(4, Q=1000, digits=30)
    b = method1_coefficients(4, Q=10000, digits=30)
    with precision(200):
        assert all(matched_digits(x, y, 30) >= 18 for x, y in zip(a, b))


def test_local_factor_exponents_are_integers():
    exps = local_factor_exponents(3, 8)
    assert all(isinstance(e, int) for e in exps.values())
    assert exps  # nontrivial for k > 1
    assert local_factor_exponents(1, 8) == {}


def test_input_checks():
    with pytest.raises(ValueError):
        method1_coefficients(0)
    with pytest.raises(ValueError):
        method1_coefficients(2, Q=1)
