"""Exact pi-monomials and certified interval enclosures."""

from __future__ import annotations

import math
import threading
from decimal import Decimal
from fractions import Fraction

import pytest
from mpmath import iv, libmp, mp

from exactnum import (
    CertifiedInterval,
    Combine,
    IntegerPower,
    Ordering,
    PiMonomial,
    eval_interval,
    gamma_half,
    interval_precision,
    ln_interval,
    monomial_combine,
    monomial_compare,
    root_interval,
)

PI_BELOW = "3.1415926535897932384626433832795028841971"
PI_ABOVE = "3.1415926535897932384626433832795028841972"


@pytest.mark.parametrize(
    "two_x, expected",
    [
        (1, PiMonomial(Fraction(1), 1)),
        (2, PiMonomial(Fraction(1))),
        (3, PiMonomial(Fraction(1, 2), 1)),
        (4, PiMonomial(Fraction(1))),
        (5, PiMonomial(Fraction(3, 4), 1)),
        (10, PiMonomial(Fraction(24))),
    ],
)
def test_gamma_half_exact(two_x, expected):
    assert gamma_half(two_x) == expected


@pytest.mark.parametrize("two_x", [0, -3])
def test_gamma_half_rejects_nonpositive(two_x):
    with pytest.raises(ValueError):
        gamma_half(two_x)


def test_monomial_normalizes():
    assert PiMonomial(Fraction(0), 7).half_pi_exp == 0
    assert PiMonomial(Fraction(2, 4), 3).coeff == Fraction(1, 2)
    assert PiMonomial(Fraction(0), 7) == PiMonomial(Fraction(0))


def test_monomial_arithmetic():
    a = PiMonomial(Fraction(2), 1)
    b = PiMonomial(Fraction(3, 5), -4)
    assert a * b == PiMonomial(Fraction(6, 5), -3)
    assert a / b == PiMonomial(Fraction(10, 3), 5)
    assert a**3 == PiMonomial(Fraction(8), 3)
    assert a**0 == PiMonomial(Fraction(1))
    assert a**-2 == PiMonomial(Fraction(1, 4), -2)
    assert monomial_combine(a, b, Combine.MULTIPLY) == a * b
    assert monomial_combine(a, a, IntegerPower(2)) == a * a


def test_monomial_division_by_zero():
    zero = PiMonomial(Fraction(0))
    with pytest.raises(ZeroDivisionError):
        PiMonomial(Fraction(1), 2) / zero
    with pytest.raises(ZeroDivisionError):
        zero**-1


def test_eval_interval_encloses_pi():
    x = eval_interval(PiMonomial(Fraction(1), 2), 128)
    assert x.width < Fraction(1, 2**120)
    assert not x.contains("3.14159265358979323846264338327950")
    j = x.to_json()
    assert Decimal(j["lo"]) <= Decimal(PI_ABOVE)
    assert Decimal(j["hi"]) >= Decimal(PI_BELOW)
    assert j["precision_bits"] == 128
    assert x.to_decimal(10) == "3.141592654"
    assert float(x) == pytest.approx(math.pi, rel=1e-15)


def test_backend_mantissa_converts_to_json():
    # MPZ is gmpy2.mpz when mpmath runs on the gmpy backend
    x = mp.make_mpf((0, libmp.MPZ(5), -1, 3))
    box = CertifiedInterval(x, x, 64)
    assert box.to_json()["lo"] == "2.5"
    assert box.to_json()["hi"] == "2.5"
    assert box.width == 0
    assert box.distance_to("3") == Fraction(1, 2)


def test_distance_to_enclosure():
    box = eval_interval(PiMonomial(Fraction(1), 2), 128)
    assert box.distance_to(PI_BELOW) < Fraction(1, 10**36)
    assert box.distance_to(box.mid) == 0
    assert box.distance_to("3.14") > Fraction(1, 1000)
    assert box.distance_to(Decimal("3.15")) > Fraction(8, 1000)


def test_zero_monomial_evaluates_to_zero():
    x = eval_interval(PiMonomial(Fraction(0)))
    assert x.contains(0)
    assert x.width == 0


def test_root_interval_of_perfect_power():
    assert root_interval(PiMonomial(Fraction(8)), 3).contains(2)
    assert root_interval(PiMonomial(Fraction(1), 8), 4).overlaps(eval_interval(PiMonomial(Fraction(1), 2)))
    with pytest.raises(ValueError):
        root_interval(PiMonomial(Fraction(8)), 0)


def test_ln_interval():
    x = ln_interval(PiMonomial(Fraction(1), 2))
    assert float(x) == pytest.approx(math.log(math.pi), rel=1e-15)
    with pytest.raises(ValueError):
        ln_interval(PiMonomial(Fraction(-1), 2))


def test_compare_decides_near_ties():
    # agrees with pi to 36 digits, so the first attempts at 64 bits cannot separate them
    close = PiMonomial(Fraction(314159265358979323846264338327950288, 10**35))
    pi = PiMonomial(Fraction(1), 2)
    assert monomial_compare(close, pi) is Ordering.LESS
    assert monomial_compare(pi, close) is Ordering.GREATER
    assert monomial_compare(pi, pi) is Ordering.EQUAL
    assert monomial_compare(PiMonomial(Fraction(1), 4), PiMonomial(Fraction("9.8696"))) is Ordering.GREATER


def test_interval_precision_restores():
    before = iv.prec
    with interval_precision(300):
        assert iv.prec == 300
        with interval_precision(80):
            assert iv.prec == 80
        assert iv.prec == 300
    assert iv.prec == before


def test_concurrent_evaluations_keep_their_precision():
    results = {}

    def work(bits):
        results[bits] = eval_interval(PiMonomial(Fraction(1), 2), bits)

    threads = [threading.Thread(target=work, args=(bits,)) for bits in (64, 256, 1024)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert results[1024].width < results[256].width < results[64].width
    assert all(x.precision_bits == bits for bits, x in results.items())


def test_gamma_recurrence():
    for two_x in range(1, 201):
        x = PiMonomial(Fraction(two_x, 2))
        assert gamma_half(two_x + 2) == gamma_half(two_x) * x


def _gamma_ratio_squared(n):
    # (Gamma(n) / Gamma(n - 1/2))^2
    return (gamma_half(2 * n) / gamma_half(2 * n - 1)) ** 2


@pytest.mark.parametrize("n", [2, 3, 10, 57, 200])
def test_gamma_ratio_bound(n):
    assert monomial_compare(_gamma_ratio_squared(n), PiMonomial(Fraction(n - 1))) is Ordering.GREATER


@pytest.mark.slow
def test_gamma_ratio_bound_full_range():
    for n in range(2, 2001):
        assert monomial_compare(_gamma_ratio_squared(n), PiMonomial(Fraction(n - 1))) is Ordering.GREATER


def test_compare_examples():
    pi = PiMonomial(Fraction(1), 2)
    nu3 = PiMonomial(Fraction(1, 16), 8)
    assert monomial_compare(pi, PiMonomial(Fraction(22, 7))) is Ordering.LESS
    assert monomial_compare(nu3, PiMonomial(Fraction(6))) is Ordering.GREATER
    assert float(eval_interval(nu3)) == pytest.approx(6.0880682, abs=1e-6)


def test_compare_is_antisymmetric_and_transitive():
    sample = [PiMonomial(Fraction(a, b), h) for a, b, h in
              [(1, 1, 2), (22, 7, 0), (1, 16, 8), (6, 1, 0), (3, 4, 1), (1, 3, 8), (7, 5, -1)]]
    flip = {Ordering.LESS: Ordering.GREATER, Ordering.GREATER: Ordering.LESS, Ordering.EQUAL: Ordering.EQUAL}
    ordered = sorted(sample, key=lambda m: float(eval_interval(m)))
    for a in sample:
        for b in sample:
            assert monomial_compare(a, b) is flip[monomial_compare(b, a)]
    for a, b in zip(ordered, ordered[1:]):
        assert monomial_compare(a, b) is Ordering.LESS


@pytest.mark.parametrize("m", [PiMonomial(Fraction(4)), PiMonomial(Fraction(1, 16), 8), PiMonomial(Fraction(7, 3), -3)])
def test_ln_interval_round_trip(m):
    with interval_precision(128):
        back = CertifiedInterval.from_iv(iv.exp(ln_interval(m).as_iv()), 128)
    assert back.contains(eval_interval(m, 256).mid)
    assert ln_interval(PiMonomial(Fraction(1))).contains(0)
