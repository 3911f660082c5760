import math

import mpmath
import numpy as np
import pytest
from gmpy2 import mpfr
from hypothesis import given, settings, strategies as st

from zetamoments.coeffdata import shipped_coefficients
from zetamoments.critical_line import FIRST_ZERO, ZeroTable, hardy_Z
from zetamoments.moments import (
    MomentComparison,
    compare_moments,
    conjecture_moment,
    data_moment,
    deviation_stats,
    dominant_term_index,
    gap_integrals,
    log_integral,
    read_comparison_csv,
    write_comparison_csv,
)
from zetamoments.polynomial import MomentPolynomial
from zetamoments.quadrature import adaptive_simpson


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 30), st.floats(20.0, 1e6))
def test_log_integral_against_quadrature(n, T):
    got = log_integral(n, T)
    with mpmath.workdps(40):
        ref = mpmath.quad(lambda t: mpmath.log(t / (2 * mpmath.pi)) ** n, [FIRST_ZERO, T])
        assert abs(mpmath.mpf(str(got)) - ref) <= mpmath.mpf(10) ** -20 * max(1, abs(ref))


def test_log_integral_zero_length():
    assert log_integral(5, FIRST_ZERO) == 0
    with pytest.raises(ValueError):
        log_integral(-1, 100)


def test_conjecture_moment_linear():
    poly = MomentPolynomial(1, [mpfr(1), mpfr(0)])
    T = 1000.0
    # int L dt with antiderivative t (L - 1)
    L = lambda t: math.log(t / (2 * math.pi))
    ref = T * (L(T) - 1) - FIRST_ZERO * (L(FIRST_ZERO) - 1)
    assert float(conjecture_moment(poly, T)) == pytest.approx(ref, rel=1e-14)
    with pytest.raises(ValueError):
        conjecture_moment(poly, 10.0)
    with pytest.raises(ValueError):
        conjecture_moment(MomentPolynomial(2, [mpfr(1)], provenance="method1"), 100.0)


def test_gap_integrals_vs_simpson(zeros_1e3):
    small = ZeroTable(zeros_1e3.ordinates[:40], float(zeros_1e3.ordinates[39]))
    for k in (1, 2):
        gaps = gap_integrals(k, small)
        t = small.ordinates
        for i in (0, 7, 38):
            ref = adaptive_simpson(lambda x: hardy_Z(x) ** (2 * k), float(t[i]), float(t[i + 1]), 1e-12)
            assert abs(gaps[i] - ref) <= 1e-6 * abs(ref)


def test_data_moment_partial_gap(zeros_1e3):
    T = 50.0
    got = data_moment(1, zeros_1e3, T)
    with mpmath.workdps(20):
        ref = mpmath.quad(lambda t: abs(mpmath.zeta(0.5 + 1j * t)) ** 2, mpmath.linspace(FIRST_ZERO, T, 8))
    assert got == pytest.approx(float(ref), rel=1e-9)
    assert data_moment(1, zeros_1e3, 10.0) == 0.0
    with pytest.raises(ValueError):
        data_moment(1, zeros_1e3, 2000.0)
    with pytest.raises(ValueError):
        data_moment(0, zeros_1e3, 50.0)


def test_compare_moments_small(zeros_1e3):
    poly = shipped_coefficients(1)
    comps = compare_moments(1, poly, zeros_1e3, 100.0, 900.0)
    assert [c.j for c in comps] == list(range(1, 10))
    assert all(c.T > 100 * c.j for c in comps)
    assert all(abs(c.rel_remainder) < 0.05 for c in comps)
    with pytest.raises(ValueError, match="first zero above"):
        compare_moments(1, poly, zeros_1e3, 100.0, 1000.0)
    with pytest.raises(ValueError):
        compare_moments(2, poly, zeros_1e3, 100.0, 900.0)
    with pytest.raises(ValueError, match="no points"):
        compare_moments(1, poly, zeros_1e3, 1000.0, 900.0)


def test_deviation_stats_and_csv(tmp_path):
    comps = [MomentComparison(j, 100.0 * j, 1.0, 1.0, (-1) ** j * 1e-3, 1e-4 / j) for j in range(1, 30)]
    sharp, smooth = deviation_stats(comps, 5)
    assert sharp > smooth > 0
    with pytest.raises(ValueError):
        deviation_stats(comps[:3], 5)
    path = tmp_path / "c.csv"
    write_comparison_csv(path, comps)
    back = read_comparison_csv(path)
    assert back[3].j == 4 and back[3].rel_remainder == pytest.approx(comps[3].rel_remainder, rel=1e-11)
    path.write_text("a,b\n")
    with pytest.raises(ValueError):
        read_comparison_csv(path)


def test_dominant_term_k1():
    # at T ~ 1e8 the leading x^1 term dominates for k = 1
    assert dominant_term_index(shipped_coefficients(1), 1e8) == 0
