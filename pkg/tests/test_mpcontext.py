import decimal

import gmpy2
import pytest
from gmpy2 import mpfr
from hypothesis import given, settings, strategies as st

from zetamoments.mpcontext import (
    ConfigError,
    PrecisionMismatch,
    bits_for_digits,
    check_delta_conditions,
    current_bits,
    ensure_precision,
    format_sci,
    make_run_config,
    normalize_degree,
    precision,
    working_digits_for,
)


def test_working_digits_budget():
    assert working_digits_for(4, 25) == 25 * 25
    assert working_digits_for(1, 12) == 7 * 12


def test_bits_cover_digits():
    for d in (6, 15, 100, 625):
        with precision(bits_for_digits(d)):
            x = mpfr(1) / 7
        ref = decimal.Context(prec=d).divide(decimal.Decimal(1), decimal.Decimal(7))
        assert decimal.Decimal(format_sci(x, d)) == ref


def test_precision_context_restores():
    before = current_bits()
    with precision(300):
        assert current_bits() == 300
        x = mpfr(1) / 3
        assert x.precision == 300
    assert current_bits() == before


def test_ensure_precision():
    with precision(200):
        ensure_precision(mpfr(1))
        with pytest.raises(PrecisionMismatch):
            ensure_precision(mpfr(1, 53))
        with pytest.raises(PrecisionMismatch):
            ensure_precision(1.0)


def test_make_run_config_fields():
    cfg = make_run_config(4, 15, "3", 100003)
    assert cfg.working_digits == 25 * 15
    assert cfg.truncation_prime == 100003
    with cfg.context():
        assert cfg.delta == mpfr(10) ** -15


def test_make_run_config_rejects():
    with pytest.raises(ConfigError):
        make_run_config(0, 15)
    with pytest.raises(ConfigError):
        make_run_config(2, 4)
    with pytest.raises(ConfigError):
        make_run_config(2, 15, "4", 1009)
    with pytest.raises(ConfigError):
        make_run_config(2, 15, "3", 1000)  # not prime


def test_delta_conditions():
    check_delta_conditions(13, 25)
    with pytest.raises(ConfigError):
        check_delta_conditions(100, 3)


def test_auto_P_is_prime_and_grows():
    a = make_run_config(2, 12).truncation_prime
    b = make_run_config(2, 15).truncation_prime
    assert gmpy2.is_prime(a) and gmpy2.is_prime(b) and b > a


def test_normalize_degree():
    assert normalize_degree(3) == "3"
    assert normalize_degree("NONE") == "none"
    with pytest.raises(ConfigError):
        normalize_degree(1)


def test_format_sci_examples():
    assert format_sci(mpfr(0), 3) == "0.00e+00"
    assert format_sci(mpfr(-1.5), 2) == "-1.5e+00"
    assert format_sci(mpfr(12345), 3) == "1.23e+04"
    assert format_sci(mpfr(9.996), 3) == "1.00e+01"
    assert format_sci(mpfr(1), 1) == "1e+00"
    with precision(200):
        assert format_sci(mpfr(1) / 3, 25) == "3.333333333333333333333333e-01"


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=-1e300, max_value=1e300, allow_nan=False).filter(lambda x: x != 0), st.integers(1, 17))
def test_format_sci_round_trip(x, sig):
    text = format_sci(mpfr(x), sig)
    back = float(text)
    assert abs(back - x) <= 0.5 * 10 ** (1 - sig) * abs(x) * 1.0000001
    assert len(text.lstrip("-").split("e")[0].replace(".", "")) == sig
