"""Exact constants of the form rational * pi^(m/2) and certified interval evaluation.

Every closed-form constant of the toolkit (sphere volumes, the nu table, the
n-th powers of the lower bounds) is a PiMonomial.  Reals leave this module only
as CertifiedInterval enclosures computed with mpmath's interval context.
"""

from __future__ import annotations

import decimal
import logging
import math
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterator, Union

from mpmath import iv, libmp, mp, mpf

logger = logging.getLogger(__name__)

DEFAULT_PRECISION = 128
MIN_PRECISION = 24
COMPARE_START_BITS = 64
COMPARE_MAX_BITS = 1 << 20

# iv.prec is process-global; every interval computation holds this lock.
_IV_LOCK = threading.RLock()
_PI_CACHE: Dict[int, tuple] = {}


@contextmanager
def interval_precision(bits: int) -> Iterator[object]:
    """Run a block with mpmath's interval context at `bits` of precision."""
    if bits < MIN_PRECISION:
        raise ValueError(f"precision_bits must be >= {MIN_PRECISION}, got {bits}")
    with _IV_LOCK:
        saved = iv.prec
        iv.prec = bits
        try:
            yield iv
        finally:
            iv.prec = saved


def _pi_constants(bits: int) -> tuple:
    """(sqrt(pi), ln(pi)) enclosures at `bits`; caller holds the lock."""
    cached = _PI_CACHE.get(bits)
    if cached is None:
        pi = +iv.pi
        cached = (iv.sqrt(pi), iv.log(pi))
        _PI_CACHE[bits] = cached
    return cached


class Ordering(Enum):
    LESS = "<"
    EQUAL = "="
    GREATER = ">"


class Combine(Enum):
    MULTIPLY = "multiply"
    DIVIDE = "divide"


@dataclass(frozen=True)
class IntegerPower:
    exponent: int


@dataclass(frozen=True)
class PiMonomial:
    """Exact real coeff * pi^(half_pi_exp / 2).

    Attributes:
        coeff: Fraction -- reduced rational coefficient
        half_pi_exp: int -- twice the exponent of pi; forced to 0 when coeff is 0
    """

    coeff: Fraction
    half_pi_exp: int = 0

    def __post_init__(self) -> None:
        coeff = Fraction(self.coeff)
        object.__setattr__(self, "coeff", coeff)
        object.__setattr__(self, "half_pi_exp", int(self.half_pi_exp))
        if coeff == 0:
            object.__setattr__(self, "half_pi_exp", 0)

    @property
    def is_zero(self) -> bool:
        return self.coeff == 0

    def __mul__(self, other: PiMonomial) -> PiMonomial:
        return monomial_combine(self, other, Combine.MULTIPLY)

    def __truediv__(self, other: PiMonomial) -> PiMonomial:
        return monomial_combine(self, other, Combine.DIVIDE)

    def __pow__(self, exponent: int) -> PiMonomial:
        return monomial_combine(self, self, IntegerPower(exponent))

    def __str__(self) -> str:
        if self.half_pi_exp == 0:
            return str(self.coeff)
        if self.half_pi_exp % 2 == 0:
            return f"{self.coeff}*pi^{self.half_pi_exp // 2}"
        return f"{self.coeff}*pi^({self.half_pi_exp}/2)"


ONE = PiMonomial(Fraction(1))
CombineOp = Union[Combine, IntegerPower]


def gamma_half(two_x: int) -> PiMonomial:
    """Gamma(two_x / 2) exactly."""
    if two_x <= 0:
        raise ValueError(f"gamma_half needs a positive argument, got two_x={two_x}")
    m, odd = divmod(two_x, 2)
    if not odd:
        return PiMonomial(Fraction(math.factorial(m - 1)))
    # Gamma(m + 1/2) = (2m)! / (4^m m!) * sqrt(pi)
    return PiMonomial(Fraction(math.factorial(2 * m), 4**m * math.factorial(m)), 1)


def monomial_combine(a: PiMonomial, b: PiMonomial, op: CombineOp) -> PiMonomial:
    """Exact product, quotient or integer power (of `a`; `b` is ignored)."""
    if op is Combine.MULTIPLY:
        return PiMonomial(a.coeff * b.coeff, a.half_pi_exp + b.half_pi_exp)
    if op is Combine.DIVIDE:
        if b.is_zero:
            raise ZeroDivisionError("division by the zero monomial")
        return PiMonomial(a.coeff / b.coeff, a.half_pi_exp - b.half_pi_exp)
    if isinstance(op, IntegerPower):
        e = op.exponent
        if e == 0:
            return ONE
        if e < 0 and a.is_zero:
            raise ZeroDivisionError("negative power of the zero monomial")
        return PiMonomial(a.coeff**e, a.half_pi_exp * e)
    raise ValueError(f"unknown monomial operation: {op!r}")


def _raw_to_fraction(raw: tuple) -> Fraction:
    p, q = libmp.to_rational(raw)
    # gmpy2 backends hand back mpz, which Decimal rejects
    return Fraction(int(p), int(q))


def _to_fraction(value: object) -> Fraction:
    if isinstance(value, mpf):
        return _raw_to_fraction(value._mpf_)
    return Fraction(value)


def _directed_decimal(x: mpf, digits: int, rounding: str) -> str:
    if not mp.isfinite(x):
        return str(x)
    exact = _to_fraction(x)
    ctx = decimal.Context(prec=digits, rounding=rounding)
    return str(ctx.divide(decimal.Decimal(exact.numerator), decimal.Decimal(exact.denominator)))


@dataclass(frozen=True)
class CertifiedInterval:
    """Enclosure [lo, hi] of a real, with the working precision that produced it.

    Attributes:
        lo: mpf -- lower endpoint, rounded down
        hi: mpf -- upper endpoint, rounded up
        precision_bits: int -- binary precision of the computation
    """

    lo: mpf
    hi: mpf
    precision_bits: int

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def from_iv(cls, x: object, precision_bits: int) -> CertifiedInterval:
        lo_raw, hi_raw = x._mpi_
        return cls(mp.make_mpf(lo_raw), mp.make_mpf(hi_raw), precision_bits)

    def as_iv(self) -> object:
        """The same enclosure as an mpmath interval (call inside interval_precision)."""
        return iv.mpf([self.lo, self.hi])

    @property
    def mid(self) -> mpf:
        raw = libmp.mpf_shift(libmp.mpf_add(self.lo._mpf_, self.hi._mpf_, 0), -1)
        return mp.make_mpf(raw)

    @property
    def width(self) -> Fraction:
        return _to_fraction(self.hi) - _to_fraction(self.lo)

    def contains(self, value: object) -> bool:
        """Exact membership test; strings are read as exact decimals."""
        x = _to_fraction(value)
        return _to_fraction(self.lo) <= x <= _to_fraction(self.hi)

    def distance_to(self, value: object) -> Fraction:
        """Exact distance from `value` to the enclosure, 0 when contained."""
        x = _to_fraction(value)
        return max(_to_fraction(self.lo) - x, x - _to_fraction(self.hi), Fraction(0))

    def overlaps(self, other: CertifiedInterval) -> bool:
        return not (self.hi < other.lo or other.hi < self.lo)

    def to_decimal(self, sig_digits: int = 10) -> str:
        """Midpoint rounded to nearest at `sig_digits` significant digits."""
        if sig_digits < 1:
            raise ValueError(f"sig_digits must be >= 1, got {sig_digits}")
        return mp.nstr(self.mid, sig_digits)

    def to_json(self) -> Dict[str, object]:
        digits = int(self.precision_bits * math.log10(2)) + 2
        return {
            "lo": _directed_decimal(self.lo, digits, decimal.ROUND_FLOOR),
            "hi": _directed_decimal(self.hi, digits, decimal.ROUND_CEILING),
            "precision_bits": self.precision_bits,
        }

    def __float__(self) -> float:
        return float(self.mid)


def _eval_iv(m: PiMonomial) -> object:
    """Interval value of `m` at the current iv precision; caller holds the lock."""
    if m.is_zero:
        return iv.mpf(0)
    value = iv.mpf(m.coeff.numerator) / iv.mpf(m.coeff.denominator)
    h = m.half_pi_exp
    if h:
        sqrt_pi = _pi_constants(iv.prec)[0]
        power = sqrt_pi ** abs(h)
        value = value * power if h > 0 else value / power
    return value


def _ln_iv(m: PiMonomial) -> object:
    if m.coeff <= 0:
        raise ValueError(f"logarithm of a nonpositive monomial: {m}")
    value = iv.log(iv.mpf(m.coeff.numerator)) - iv.log(iv.mpf(m.coeff.denominator))
    if m.half_pi_exp:
        value = value + iv.mpf(m.half_pi_exp) * _pi_constants(iv.prec)[1] / 2
    return value


def eval_interval(m: PiMonomial, precision_bits: int = DEFAULT_PRECISION) -> CertifiedInterval:
    with interval_precision(precision_bits):
        return CertifiedInterval.from_iv(_eval_iv(m), precision_bits)


def ln_interval(m: PiMonomial, precision_bits: int = DEFAULT_PRECISION) -> CertifiedInterval:
    """Enclosure of ln(coeff) + (half_pi_exp / 2) * ln(pi); `m` must be positive."""
    with interval_precision(precision_bits):
        return CertifiedInterval.from_iv(_ln_iv(m), precision_bits)


def root_interval(m: PiMonomial, n: int, precision_bits: int = DEFAULT_PRECISION) -> CertifiedInterval:
    """Enclosure of the positive n-th root of `m`, computed in log space."""
    if n < 1:
        raise ValueError(f"root order must be positive, got {n}")
    if m.is_zero:
        return eval_interval(m, precision_bits)
    with interval_precision(precision_bits):
        return CertifiedInterval.from_iv(iv.exp(_ln_iv(m) / n), precision_bits)


def monomial_compare(a: PiMonomial, b: PiMonomial) -> Ordering:
    """Exact ordering of two monomials.

    Distinct normalized monomials have distinct values, so doubling the precision
    until the enclosures separate always terminates.
    """
    if a == b:
        return Ordering.EQUAL
    bits = COMPARE_START_BITS
    while bits <= COMPARE_MAX_BITS:
        x = eval_interval(a, bits)
        y = eval_interval(b, bits)
        if x.hi < y.lo:
            return Ordering.LESS
        if x.lo > y.hi:
            return Ordering.GREATER
        logger.debug("compare %s vs %s undecided at %d bits, escalating", a, b, bits)
        bits *= 2
    raise ArithmeticError(f"could not separate {a} and {b} within {COMPARE_MAX_BITS} bits")
