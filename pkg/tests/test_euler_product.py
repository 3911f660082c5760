import math
import random

import mpmath
import pytest
from gmpy2 import mpfr
from hypothesis import given, settings, strategies as st

from zetamoments.combinatorics import enumerate_xi, make_shift_vector
from zetamoments.euler_product import (
    ShiftCollision,
    accelerant_keys,
    choose_truncation_P,
    count_accelerant_multiplicities,
    count_accelerant_multiplicities_bruteforce,
    estimate_tail_error,
    evaluate_A_k,
    h_m_coefficient,
    local_factor,
    maclaurin_table_check,
)
from zetamoments.mpcontext import ConfigError, bits_for_digits, make_run_config, precision


def theta_oracle(p, sigma, d, N=256):
    """Local factor as the mean over the unit circle of the generating function."""
    k = sigma.k
    with mpmath.workdps(30):
        delta = mpmath.mpf(10) ** -d
        z = [sigma.first_half[j] * delta for j in range(k)] + [sigma.second_half[j] * delta for j in range(k)]
        u = [mpmath.mpf(p) ** (-0.5 - z[j]) for j in range(k)]
        w = [mpmath.mpf(p) ** (-0.5 + z[k + j]) for j in range(k)]
        pre = mpmath.mpf(1)
        for l in range(k):
            for j in range(k):
                pre *= 1 - u[l] * w[j]
        acc = mpmath.mpf(0)
        for n in range(N):
            e = mpmath.expjpi(mpmath.mpf(2 * n) / N)
            den = mpmath.mpf(1)
            for j in range(k):
                den *= (1 - u[j] * e) * (1 - w[j] / e)
            acc += 1 / den
        return mpmath.re(pre * acc / N)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4), st.sampled_from([2, 3, 5, 7, 11, 101, 1009]), st.integers(3, 8), st.data())
def test_local_factor_matches_circle_mean(k, p, d, data):
    sigma = data.draw(st.sampled_from(enumerate_xi(k)))
    with precision(bits_for_digits((k * k + k + 5) * d)):
        got = local_factor(p, sigma, make_shift_vector(k, mpfr(10) ** -d))
    ref = theta_oracle(p, sigma, d)
    with mpmath.workdps(30):
        assert abs(mpmath.mpf(str(got)) / ref - 1) < mpmath.mpf(10) ** -20


def test_k1_local_factor_identically_one():
    rng = random.Random(7)
    sigma = enumerate_xi(1)[0]
    for _ in range(100):
        p = rng.choice([2, 3, 5, 7, 11, 13, 9973, 104729])
        d = rng.randint(6, 30)
        with precision(bits_for_digits(7 * d)):
            assert local_factor(p, sigma, make_shift_vector(1, mpfr(10) ** -d)) == 1


def test_shift_collision():
    sigma = enumerate_xi(2)[0]
    with precision(200):
        with pytest.raises(ShiftCollision):
            local_factor(3, sigma, make_shift_vector(2, mpfr(10) ** -300))


@pytest.mark.parametrize("k", [2, 3, 4])
def test_multiplicities_convolution_vs_bruteforce(k):
    for sigma in enumerate_xi(k):
        fast = count_accelerant_multiplicities(sigma)
        slow = count_accelerant_multiplicities_bruteforce(sigma)
        assert fast == slow
        for f, ms in enumerate(fast):
            assert ms.total == ms.expected_total(f, k)


def test_accelerant_key_range():
    keys = accelerant_keys(4, "3")
    assert max(abs(m) for _, m in keys) == 17
    assert accelerant_keys(1, "3") == []
    assert all(d == 2 for d, _ in accelerant_keys(3, "2"))


def test_maclaurin_table():
    assert [v for _, v in maclaurin_table_check()] == [0, -1, 0, 0, 4, 1, 0, 0, 0, 0]


@pytest.mark.parametrize("k", [1, 2, 3])
def test_h_m_coefficient(k):
    # direct power series product
    n = 12
    a = [math.comb(k * k, j // 2) if j % 2 == 0 else 0 for j in range(n)]
    b = [math.comb(2 * k + j - 1, j) for j in range(n)]
    conv = [sum(a[i] * b[m - i] for i in range(m + 1)) for m in range(n)]
    assert [h_m_coefficient(m, k) for m in range(n)] == conv


def test_tail_error_model():
    with precision(200):
        e3 = estimate_tail_error(4, 10**5, mpfr(10) ** -15, "3")
        e2 = estimate_tail_error(4, 10**5, mpfr(10) ** -15, "2")
        assert e3 < e2
        ratio = estimate_tail_error(4, 10**6, mpfr(10) ** -15) / e3
        assert 1e-3 * 0.8 < ratio < 1e-3  # ~P^-3 / log P
        with pytest.raises(ConfigError):
            estimate_tail_error(4, 1000, mpfr("0.5"))


def test_choose_truncation_P():
    P = choose_truncation_P(4, 15)
    assert P >= 4 ** (8 / 3) * 1e5
    with pytest.raises(ConfigError):
        choose_truncation_P(13, 40)


def test_evaluate_A_k_k1_is_one():
    cfg = make_run_config(1, 12, "3", 101)
    res = evaluate_A_k(enumerate_xi(1)[0], make_shift_vector(1, mpfr("1e-12")), cfg)
    assert res.value == 1


def _A(k, P, degree, digits=10):
    cfg = make_run_config(k, digits, degree, P)
    sigma = enumerate_xi(k)[1]
    with cfg.context():
        return evaluate_A_k(sigma, make_shift_vector(k, cfg.delta), cfg).value


@pytest.mark.slow
def test_tail_scaling_k3():
    """Log-log slope of the accelerated tail error in P (degree 3 -> about -3, degree 2 -> about -2)."""
    ref = _A(3, 100003, "3")
    slopes = {}
    for degree in ("3", "2"):
        Ps = [211, 421, 839, 1693]
        errs = [abs(float((_A(3, P, degree) - ref) / ref)) for P in Ps]
        slopes[degree] = (math.log(errs[-1]) - math.log(errs[0])) / (math.log(Ps[-1]) - math.log(Ps[0]))
    assert -3.6 < slopes["3"] < -2.4
    assert -2.6 < slopes["2"] < -1.4
