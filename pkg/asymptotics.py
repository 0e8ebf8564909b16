"""Exponent arithmetic for power-law singularities.

Counterexample on H_1^{n-2} x S^2: the model space is conformal to
S^n minus S^{n-3} via G_1 = f^{4/(n-2)} rho^n. Pulling back a harmonic-type
function H with H ~ r'^{-1} near S^{n-3} gives u = f^{-1} H, a solution in
L^{p_n} that is not in L^2. Only exponents matter, so every verdict here is a
comparison of rationals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict

from exactnum import DEFAULT_PRECISION, CertifiedInterval, PiMonomial, eval_interval
from invariants import p_n, sphere_volume


class FConvention(str, Enum):
    """Asymptotic of the conformal factor f near S^{n-3}.

    DERIVED: f ~ r'^{-(n-2)/2}, forced by G_1 = f^{4/(n-2)} rho^n = sin(r')^{-2} rho^n.
    PAPER_STATED: f ~ r'^{-2/(n-2)}, the inverted exponent found in the literature.
    """

    DERIVED = "derived"
    PAPER_STATED = "paper-stated"


@dataclass(frozen=True)
class GermExponent:
    """Germ r^a near a singular set of codimension `codim`."""

    a: Fraction
    codim: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", Fraction(self.a))
        if self.codim < 1:
            raise ValueError(f"codimension must be >= 1, got {self.codim}")

    def integrable(self, q: Fraction) -> bool:
        return power_integrable(self.a, q, self.codim)


def power_integrable(a: Fraction, q: Fraction, d: int) -> bool:
    """Whether r^(a q) is integrable near a codimension-d set: a q + d > 0."""
    q = Fraction(q)
    if d < 1:
        raise ValueError(f"codimension must be >= 1, got {d}")
    if q <= 0:
        raise ValueError(f"exponent q must be positive, got {q}")
    return Fraction(a) * q + d > 0


def f_exponent(n: int, convention: FConvention) -> Fraction:
    if convention is FConvention.DERIVED:
        return Fraction(-(n - 2), 2)
    return Fraction(-2, n - 2)


def green_normalization_exact(n: int) -> PiMonomial:
    """(4(n-1) omega_{n-1})^{-1}, the leading coefficient of the Green function."""
    if n < 3:
        raise ValueError(f"green_normalization needs n >= 3, got {n}")
    return PiMonomial(Fraction(1, 4 * (n - 1))) / sphere_volume(n - 1)


def green_normalization(n: int, precision_bits: int = DEFAULT_PRECISION) -> CertifiedInterval:
    return eval_interval(green_normalization_exact(n), precision_bits)


@dataclass
class CounterexampleReport:
    """Integrability verdicts for u = f^{-1} H near S^{n-3}.

    Attributes:
        n: int -- dimension
        convention: FConvention -- convention the flag refers to
        green: GermExponent -- Green function germ at a point
        h: GermExponent -- H ~ r'^{-1} near S^{n-3}
        f: Dict[str, GermExponent] -- conformal factor per convention
        u: Dict[str, GermExponent] -- u = f^{-1} H per convention
        verdict_lpn: bool -- int H^{p_n} d(rho^n) finite
        verdict_lpn_g1: Dict[str, bool] -- same integral written in G_1 with weight f^{p_n}
        verdict_l2: Dict[str, bool] -- int u^2 dv^{G_1} = int H^2 f^{p_n-2} d(rho^n) finite
        discrepancy_flag: bool -- the selected convention contradicts u not in L^2
    """

    n: int
    convention: FConvention
    green: GermExponent
    h: GermExponent
    f: Dict[str, GermExponent] = field(default_factory=dict)
    u: Dict[str, GermExponent] = field(default_factory=dict)
    verdict_lpn: bool = False
    verdict_lpn_g1: Dict[str, bool] = field(default_factory=dict)
    verdict_l2: Dict[str, bool] = field(default_factory=dict)
    discrepancy_flag: bool = False

    def to_json(self) -> Dict[str, object]:
        def germ(g: GermExponent) -> Dict[str, object]:
            return {"a": str(g.a), "codim": g.codim}

        return {
            "n": self.n,
            "convention": self.convention.value,
            "p_n": str(p_n(self.n)),
            "green": germ(self.green),
            "h": germ(self.h),
            "f": {key: germ(g) for key, g in self.f.items()},
            "u": {key: germ(g) for key, g in self.u.items()},
            "verdict_lpn": self.verdict_lpn,
            "verdict_lpn_g1": dict(self.verdict_lpn_g1),
            "verdict_l2": dict(self.verdict_l2),
            "discrepancy_flag": self.discrepancy_flag,
        }


def counterexample_report(n: int, convention: FConvention = FConvention.DERIVED) -> CounterexampleReport:
    if n < 5:
        raise ValueError(f"counterexample needs n >= 5, got {n}")
    p = p_n(n)
    h = GermExponent(Fraction(-1), 3)
    report = CounterexampleReport(
        n=n,
        convention=convention,
        green=GermExponent(Fraction(-(n - 2)), n),
        h=h,
        verdict_lpn=h.integrable(p),
    )
    for conv in FConvention:
        a_f = f_exponent(n, conv)
        u = GermExponent(-1 - a_f, 3)
        report.f[conv.value] = GermExponent(a_f, 3)
        report.u[conv.value] = u
        # dv^{G_1} = f^{p_n} d(rho^n)
        report.verdict_lpn_g1[conv.value] = GermExponent(u.a + a_f, 3).integrable(p)
        report.verdict_l2[conv.value] = power_integrable(-2 + a_f * (p - 2), 1, 3)
    report.discrepancy_flag = report.verdict_l2[convention.value]
    return report
