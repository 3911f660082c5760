"""Precision regime for a coefficient run.

All high-precision arithmetic in the package is done with :mod:`gmpy2` ``mpfr``
values (MPFR underneath, round-to-nearest). An ``mpfr`` already carries its own
precision, so it plays the role of the tagged big real; the helpers here create
the run-wide context and guard against mixing precisions.
"""

from __future__ import annotations

import decimal
import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterator, Optional

import gmpy2
from gmpy2 import mpfr

ACCELERANT_DEGREES = ("none", "2", "3")
MIN_DIGITS = 6
GUARD_BITS = 32

_LOG2_10 = math.log2(10)


class ConfigError(ValueError):
    """A run configuration violates the precision or truncation rules."""


class PrecisionMismatch(ValueError):
    """A value does not carry the precision of the context it is used in."""


def bits_for_digits(digits: int) -> int:
    """Binary precision needed to hold ``digits`` decimal digits plus guard bits."""
    return int(math.ceil(digits * _LOG2_10)) + GUARD_BITS


def working_digits_for(k: int, digits: int) -> int:
    return (k * k + k + 5) * digits


def normalize_degree(degree) -> str:
    d = str(degree).lower()
    if d not in ACCELERANT_DEGREES:
        raise ConfigError(f"accelerant degree must be one of {ACCELERANT_DEGREES}, got {degree!r}")
    return d


@contextmanager
def precision(bits: int) -> Iterator[gmpy2.context]:
    """Temporarily switch the gmpy2 context to ``bits`` of precision, round-to-nearest."""
    with gmpy2.context(gmpy2.get_context(), precision=bits, round=gmpy2.RoundToNearest) as ctx:
        yield ctx


def current_bits() -> int:
    return gmpy2.get_context().precision


def format_sci(x, sig: int) -> str:
    """Format an mpfr (or anything mpfr accepts) as ``d.ddd...e+XX`` with ``sig`` digits."""
    x = x if isinstance(x, type(mpfr(0))) else mpfr(x)
    if not gmpy2.is_finite(x):
        return str(x)
    if x == 0:
        return "0." + "0" * (sig - 1) + "e+00"
    # exact binary value rounded once, half-even, to sig decimal digits
    num, den = x.as_integer_ratio()
    ctx = decimal.Context(prec=sig, rounding=decimal.ROUND_HALF_EVEN, Emin=-(10**9), Emax=10**9)
    d = ctx.divide(decimal.Decimal(int(num)), decimal.Decimal(int(den)))
    neg, digits, dexp = d.as_tuple()
    mant = "".join(map(str, digits))
    e = dexp + len(mant) - 1
    mant = mant.ljust(sig, "0")[:sig]
    sign = "-" if neg else ""
    body = mant[0] + ("." + mant[1:] if sig > 1 else "")
    return f"{sign}{body}e{'+' if e >= 0 else '-'}{abs(e):02d}"


def ensure_precision(x, bits: Optional[int] = None) -> None:
    """Raise :class:`PrecisionMismatch` unless ``x`` carries exactly ``bits`` of precision."""
    bits = current_bits() if bits is None else bits
    if not isinstance(x, type(mpfr(0))):
        raise PrecisionMismatch(f"expected an mpfr value, got {type(x).__name__}")
    if x.precision != bits:
        raise PrecisionMismatch(f"value has {x.precision} bits, context requires {bits}")


@dataclass(frozen=True)
class RunConfig:
    """Full precision/truncation budget of one coefficient run.

    ``delta`` is not stored: it is recreated on demand as the correctly rounded
    value of ``10**-digits`` at the working precision, which keeps the config
    hashable and cheap to pickle.
    """

    k: int
    digits: int
    working_digits: int
    truncation_prime: int
    accelerant_degree: str = "3"
    safety: float = field(default=1.0, compare=False)

    @property
    def bits(self) -> int:
        return bits_for_digits(self.working_digits)

    @property
    def delta(self):
        with precision(self.bits):
            return mpfr(1) / mpfr(10) ** self.digits

    def context(self):
        return precision(self.bits)

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "digits": self.digits,
            "working_digits": self.working_digits,
            "truncation_prime": self.truncation_prime,
            "accelerant_degree": self.accelerant_degree,
            "delta": f"1e-{self.digits}",
        }


def check_delta_conditions(k: int, digits: int) -> None:
    delta = 10.0 ** (-digits)
    if not 8 * k * delta < 3:
        raise ConfigError(f"8*k*delta must be < 3 (k={k}, digits={digits})")
    side = k * (math.log(k) + digits * math.log(10)) * delta
    if not side < 0.01:
        raise ConfigError(
            f"k*(ln k + digits*ln 10)*10^-digits = {side:.3g} must be < 1/100; increase digits"
        )


def make_run_config(
    k: int,
    digits: int,
    accelerant_degree="3",
    truncation_prime: Optional[int] = None,
    safety: float = 1.0,
) -> RunConfig:
    """Validate a run and derive its working precision.

    When ``truncation_prime`` is omitted it is chosen by
    :func:`zetamoments.euler_product.choose_truncation_P`.
    """
    from .primes import is_prime

    if not isinstance(k, int) or k < 1:
        raise ConfigError(f"k must be a positive integer, got {k!r}")
    if not isinstance(digits, int) or digits < MIN_DIGITS:
        raise ConfigError(f"digits must be an integer >= {MIN_DIGITS}, got {digits!r}")
    degree = normalize_degree(accelerant_degree)
    check_delta_conditions(k, digits)
    if truncation_prime is None:
        from .euler_product import choose_truncation_P

        truncation_prime = choose_truncation_P(k, digits, safety)
    elif not is_prime(int(truncation_prime)):
        raise ConfigError(f"truncation prime {truncation_prime} is not prime")
    return RunConfig(
        k=k,
        digits=digits,
        working_digits=working_digits_for(k, digits),
        truncation_prime=int(truncation_prime),
        accelerant_degree=degree,
        safety=safety,
    )
