"""Closed-form geometric constants.

Sphere volumes, sphere Yamabe constants, the nu table, the lower bounds
Lambda_{n,k}, Lambda_{n,>=2} and lambda_n, and the curvature constants of the
model spaces M_c^{n,k} = H_c^{k+1} x S^{n-k-1}.

Lower bounds are carried as their exact n-th powers; n-th roots are taken only
when a value is requested.

Note: nu_3 = omega_3^2 (1/4)^3 = pi^4/16. The value pi^6/8 sometimes quoted for
nu_3 does not satisfy the defining formula and does not reproduce
lambda_11 = 135.9033973.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import FrozenSet, Union

from mpmath import iv

from exactnum import (
    DEFAULT_PRECISION,
    CertifiedInterval,
    Combine,
    Ordering,
    PiMonomial,
    gamma_half,
    interval_precision,
    monomial_combine,
    monomial_compare,
    root_interval,
)

logger = logging.getLogger(__name__)

# (mu(HP^2) / (8 a_8))^8 in the form it is usually quoted.
HP2_CONSTANT = PiMonomial(Fraction(3**6 * 2**18, 7**8 * 5**2), 16)


def a_n(n: int) -> Fraction:
    """Coefficient 4(n-1)/(n-2) of the conformal Laplacian."""
    if n < 3:
        raise ValueError(f"a_n needs n >= 3, got {n}")
    return Fraction(4 * (n - 1), n - 2)


def p_n(n: int) -> Fraction:
    """Critical Sobolev exponent 2n/(n-2)."""
    if n < 3:
        raise ValueError(f"p_n needs n >= 3, got {n}")
    return Fraction(2 * n, n - 2)


@dataclass(frozen=True)
class NotCovered:
    """No explicit bound is available for this case.

    Attributes:
        reason: str -- human readable explanation
    """

    reason: str


@dataclass(frozen=True)
class LowerBound:
    """A lower bound known exactly through its n-th power.

    Attributes:
        n: int -- dimension, the root order
        label: str -- identifier such as "Lambda_{7,2}"
        pow_n: PiMonomial -- exact n-th power of the bound
        value: CertifiedInterval -- enclosure of the n-th root
    """

    n: int
    label: str
    pow_n: PiMonomial
    value: CertifiedInterval


@dataclass(frozen=True)
class MinimumBound:
    """Lambda_{n,>=2}: the minimum over 2 <= k <= n-4 with its full argmin set."""

    n: int
    pow_n: PiMonomial
    value: CertifiedInterval
    argmin: FrozenSet[int]


@lru_cache(maxsize=None)
def sphere_volume(ell: int) -> PiMonomial:
    """omega_ell = vol(S^ell) = 2 pi^((ell+1)/2) / Gamma((ell+1)/2)."""
    if ell < 1:
        raise ValueError(f"sphere_volume needs ell >= 1, got {ell}")
    return monomial_combine(PiMonomial(Fraction(2), ell + 1), gamma_half(ell + 1), Combine.DIVIDE)


@lru_cache(maxsize=4096)
def sphere_yamabe_power(n: int) -> PiMonomial:
    """mu(S^n)^n = (n(n-1))^n omega_n^2."""
    if n < 3:
        raise ValueError(f"yamabe_sphere needs n >= 3, got {n}")
    return PiMonomial(Fraction(n * (n - 1)) ** n) * sphere_volume(n) ** 2


def yamabe_sphere(n: int, precision_bits: int = DEFAULT_PRECISION) -> CertifiedInterval:
    """mu(S^n) = n(n-1) omega_n^(2/n)."""
    return root_interval(sphere_yamabe_power(n), n, precision_bits)


@lru_cache(maxsize=8192)
def nu(ell: int) -> PiMonomial:
    """nu_ell = omega_ell^2 ((ell-2)/4)^ell; zero for ell = 2."""
    if ell < 2:
        raise ValueError(f"nu needs ell >= 2, got {ell}")
    if ell == 2:
        return PiMonomial(Fraction(0))
    return sphere_volume(ell) ** 2 * PiMonomial(Fraction(ell - 2, 4) ** ell)


def _scale_power(n: int) -> PiMonomial:
    return PiMonomial((n * a_n(n)) ** n)


def _check_lambda_range(n: int, k: int) -> Union[NotCovered, None]:
    if n < 3:
        raise ValueError(f"dimension must be >= 3, got n={n}")
    if k == 0:
        raise ValueError("k = 0 is the sphere itself; use yamabe_sphere")
    if k in (1, n - 3) and 0 < k <= n - 3:
        return NotCovered(f"no explicit bound for k={k} in dimension n={n} (k = 1 or k = n-3)")
    if n < 6 or not 2 <= k <= n - 4:
        raise ValueError(f"k={k} outside the range 2 <= k <= n-4 for n={n}")
    return None


@lru_cache(maxsize=4096)
def _lambda_lower_power(n: int, k: int) -> PiMonomial:
    return _scale_power(n) * nu(k + 1) * nu(n - k - 1)


def lambda_lower_power(n: int, k: int) -> Union[PiMonomial, NotCovered]:
    """Exact Lambda_{n,k}^n = (n a_n)^n nu_{k+1} nu_{n-k-1}."""
    missing = _check_lambda_range(n, k)
    if missing is not None:
        return missing
    return _lambda_lower_power(n, k)


def lambda_lower(n: int, k: int, precision_bits: int = DEFAULT_PRECISION) -> Union[LowerBound, NotCovered]:
    power = lambda_lower_power(n, k)
    if isinstance(power, NotCovered):
        return power
    return LowerBound(n, f"Lambda_{{{n},{k}}}", power, root_interval(power, n, precision_bits))


def lambda_lower_quotient_form(n: int, k: int, precision_bits: int = DEFAULT_PRECISION) -> CertifiedInterval:
    """Lambda_{n,k} evaluated from the sphere Yamabe constants of S^{k+1} and S^{n-k-1}.

    n a_n / ((k+1) a_{k+1})^{(k+1)/n} / ((n-k-1) a_{n-k-1})^{(n-k-1)/n}
        * mu(S^{k+1})^{(k+1)/n} * mu(S^{n-k-1})^{(n-k-1)/n}
    """
    missing = _check_lambda_range(n, k)
    if missing is not None:
        raise ValueError(missing.reason)
    mu_a = yamabe_sphere(k + 1, precision_bits + 16)
    mu_b = yamabe_sphere(n - k - 1, precision_bits + 16)
    with interval_precision(precision_bits):
        def term(dim: int, mu: CertifiedInterval) -> object:
            scale = dim * a_n(dim)
            ratio = mu.as_iv() * scale.denominator / scale.numerator
            return iv.exp(iv.log(ratio) * dim / n)

        scale = n * a_n(n)
        value = iv.mpf(scale.numerator) / scale.denominator * term(k + 1, mu_a) * term(n - k - 1, mu_b)
        return CertifiedInterval.from_iv(value, precision_bits)


def lambda_lower_min(n: int, precision_bits: int = DEFAULT_PRECISION) -> MinimumBound:
    """Lambda_{n,>=2} by exact comparison of n-th powers over 2 <= k <= (n-2)/2.

    Lambda_{n,k} = Lambda_{n,n-k-2}, so the upper half of the range is the mirror image.
    """
    if n < 6:
        raise ValueError(f"Lambda_{{n,>=2}} needs n >= 6, got {n}")
    best = [2]
    best_power = _lambda_lower_power(n, 2)
    for k in range(3, (n - 2) // 2 + 1):
        power = _lambda_lower_power(n, k)
        order = monomial_compare(power, best_power)
        if order is Ordering.LESS:
            best, best_power = [k], power
        elif order is Ordering.EQUAL:
            best.append(k)
    argmin = frozenset(best) | frozenset(n - 2 - k for k in best)
    logger.debug("Lambda_{%d,>=2} attained at k in %s", n, sorted(argmin))
    return MinimumBound(n, best_power, root_interval(best_power, n, precision_bits), argmin)


def hp2_yamabe_power() -> PiMonomial:
    """mu(HP^2)^8 = (128 pi)^8 / 120^2."""
    return PiMonomial(Fraction(128**8, 120**2), 16)


def yamabe_hp2(precision_bits: int = DEFAULT_PRECISION) -> CertifiedInterval:
    """mu(HP^2) = 128 pi / 120^(1/4)."""
    return root_interval(hp2_yamabe_power(), 8, precision_bits)


def hp2_constant() -> PiMonomial:
    """(mu(HP^2) / (8 a_8))^8, derived from mu(HP^2)."""
    return hp2_yamabe_power() / _scale_power(8)


@lru_cache(maxsize=4096)
def _lambda_hp2_power(n: int) -> PiMonomial:
    return _scale_power(n) * HP2_CONSTANT * nu(n - 8)


def lambda_hp2_power(n: int) -> PiMonomial:
    """Exact lambda_n^n = (n a_n)^n (mu(HP^2)/(8 a_8))^8 nu_{n-8}."""
    if n < 11:
        raise ValueError(f"lambda_n needs n >= 11, got {n}")
    return _lambda_hp2_power(n)


def lambda_hp2(n: int, precision_bits: int = DEFAULT_PRECISION) -> LowerBound:
    power = lambda_hp2_power(n)
    return LowerBound(n, f"lambda_{n}", power, root_interval(power, n, precision_bits))


@dataclass(frozen=True)
class ModelSpace:
    """M_c^{n,k} = H_c^{k+1} x S^{n-k-1}, stored with c >= 0.

    Attributes:
        n: int -- total dimension
        k: int -- surgery dimension, 0 <= k <= n-3
        c: Fraction -- |c| <= 1 (M_c and M_{-c} coincide)
    """

    n: int
    k: int
    c: Fraction

    def __post_init__(self) -> None:
        c = abs(Fraction(self.c))
        if self.n < 3:
            raise ValueError(f"model space needs n >= 3, got {self.n}")
        if not 0 <= self.k <= self.n - 3:
            raise ValueError(f"model space needs 0 <= k <= n-3, got k={self.k} for n={self.n}")
        if c > 1:
            raise ValueError(f"model space needs |c| <= 1, got c={self.c}")
        object.__setattr__(self, "c", c)

    @property
    def fiber_dim(self) -> int:
        return self.n - self.k - 1

    def __str__(self) -> str:
        return f"M_{self.c}^({self.n},{self.k})"


@dataclass(frozen=True)
class ModelConstants:
    """Curvature and threshold constants of a model space.

    Attributes:
        scal: Fraction -- scalar curvature -c^2 k(k+1) + (n-k-1)(n-k-2)
        alpha: Fraction -- k^2 c^2 / 4 + scal / a_n
        alpha_displayed: Fraction -- same constant written as a quadratic in c
        assumption_ok: bool -- 2k|c| < n(n-k-2)
        d2_threshold: Fraction -- (n-k-2)^2 (n-1) / (8(n-2))
        tau_threshold: Fraction -- (n-k-2)/2
    """

    scal: Fraction
    alpha: Fraction
    alpha_displayed: Fraction
    assumption_ok: bool
    d2_threshold: Fraction
    tau_threshold: Fraction


def model_constants(m: ModelSpace) -> ModelConstants:
    n, k, c = m.n, m.k, m.c
    scal = -(c**2) * k * (k + 1) + (n - k - 1) * (n - k - 2)
    alpha = Fraction(k**2) * c**2 / 4 + scal / a_n(n)
    alpha_displayed = (
        Fraction(-(n - k - 2) * k, 4 * (n - 1)) * c**2
        + Fraction((n - 2) * (n - k - 1) * (n - k - 2), 4 * (n - 1))
    )
    return ModelConstants(
        scal=Fraction(scal),
        alpha=alpha,
        alpha_displayed=alpha_displayed,
        assumption_ok=2 * k * c < n * (n - k - 2),
        d2_threshold=Fraction((n - k - 2) ** 2 * (n - 1), 8 * (n - 2)),
        tau_threshold=Fraction(n - k - 2, 2),
    )


def assumption_holds_for_all_c(n: int, k: int) -> bool:
    """2k|c| < n(n-k-2) for every |c| <= 1, i.e. at c = 1."""
    return 2 * k < n * (n - k - 2)


def assumption_holds_for_open_c(n: int, k: int) -> bool:
    """2k|c| < n(n-k-2) for every |c| < 1."""
    return 2 * k <= n * (n - k - 2)


def second_infimum_dominates(n: int, k: int) -> bool:
    """Cases where the second Yamabe-type infimum of M_c^{n,k} is at least the first."""
    if not 0 <= k <= n - 3:
        raise ValueError(f"k={k} outside 0 <= k <= n-3 for n={n}")
    return k <= n - 4 or n in (4, 5)
