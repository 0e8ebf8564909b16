"""Explicit lower bounds for the smooth Yamabe invariant sigma(M).

Surgery of dimension k on a manifold M gives N with
sigma(N) >= min(sigma(M), Lambda_{n,k}). Starting from sigma(S^n) = mu(S^n) and
folding that inequality along a chain of surgeries yields the bounds below.
Topological classes (spin boundary, alpha invariant) are flags supplied by the
caller.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Union

from exactnum import DEFAULT_PRECISION, CertifiedInterval, Ordering, PiMonomial, monomial_compare, root_interval
from invariants import (
    hp2_yamabe_power,
    lambda_hp2,
    lambda_lower,
    lambda_lower_min,
    sphere_yamabe_power,
    yamabe_sphere,
)

logger = logging.getLogger(__name__)


class TopoClass(str, Enum):
    TWO_CONNECTED_SPIN_BOUNDARY = "two-connected-spin-boundary"
    TWO_CONNECTED_ALPHA_ZERO = "two-connected-alpha-zero"
    TWO_CONNECTED_ALPHA_NONZERO = "two-connected-alpha-nonzero"


@dataclass(frozen=True)
class SurgeryChain:
    """Dimensions of the surgeries leading from S^n to the manifold."""

    dims: tuple


@dataclass(frozen=True)
class TopoInput:
    n: int
    kind: Union[SurgeryChain, TopoClass]


class BoundStatus(str, Enum):
    NUMERIC = "numeric"
    ZERO = "zero"
    NOT_COVERED = "not-covered"


@dataclass(frozen=True)
class BoundTerm:
    """One candidate of the minimum, known exactly through its n-th power.

    Attributes:
        label: str -- e.g. "mu(S^7)", "Lambda_{7,2}", "lambda_11", "mu(HP^2)"
        root: int -- root order relating pow_root to value
        pow_root: PiMonomial -- exact value^root
        value: CertifiedInterval -- enclosure of the term
    """

    label: str
    root: int
    pow_root: PiMonomial
    value: CertifiedInterval


@dataclass
class BoundResult:
    n: int
    status: BoundStatus
    trail: List[BoundTerm] = field(default_factory=list)
    minimum: Optional[BoundTerm] = None
    note: str = ""

    @property
    def value(self) -> Optional[CertifiedInterval]:
        return self.minimum.value if self.minimum is not None else None

    def exceeds(self, threshold: Union[str, Fraction, int]) -> bool:
        """Certified strict inequality bound > threshold."""
        t = Fraction(threshold)
        if self.status is BoundStatus.ZERO:
            return 0 > t
        if self.status is BoundStatus.NOT_COVERED or self.minimum is None:
            return False
        if t < 0:
            return True
        term = self.minimum
        return monomial_compare(term.pow_root, PiMonomial(t**term.root)) is Ordering.GREATER

    def to_json(self, sig_digits: int = 10) -> Dict[str, object]:
        return {
            "n": self.n,
            "status": self.status.value,
            "value": self.value.to_decimal(sig_digits) if self.value is not None else None,
            "minimum": self.minimum.label if self.minimum is not None else None,
            "trail": [
                {
                    "label": term.label,
                    "value": term.value.to_decimal(sig_digits),
                    "pow": str(term.pow_root),
                    "root": term.root,
                    "interval": term.value.to_json(),
                }
                for term in self.trail
            ],
            "note": self.note,
        }


def _sphere_term(n: int, precision_bits: int) -> BoundTerm:
    return BoundTerm(f"mu(S^{n})", n, sphere_yamabe_power(n), yamabe_sphere(n, precision_bits))


def _lambda_term(n: int, k: int, precision_bits: int) -> BoundTerm:
    bound = lambda_lower(n, k, precision_bits)
    return BoundTerm(bound.label, n, bound.pow_n, bound.value)


def _hp2_term(n: int, precision_bits: int) -> BoundTerm:
    bound = lambda_hp2(n, precision_bits)
    return BoundTerm(bound.label, n, bound.pow_n, bound.value)


def _hp2_surface_term(precision_bits: int) -> BoundTerm:
    power = hp2_yamabe_power()
    return BoundTerm("mu(HP^2)", 8, power, root_interval(power, 8, precision_bits))


def _smaller(a: BoundTerm, b: BoundTerm) -> bool:
    if a.root == b.root:
        return monomial_compare(a.pow_root, b.pow_root) is Ordering.LESS
    # a^(ra rb) vs b^(ra rb)
    return monomial_compare(a.pow_root ** b.root, b.pow_root ** a.root) is Ordering.LESS


def min_of_trail(n: int, trail: Iterable[BoundTerm], note: str = "") -> BoundResult:
    terms = list(trail)
    if not terms:
        raise ValueError("a bound needs at least one term")
    best = terms[0]
    for term in terms[1:]:
        if _smaller(term, best):
            best = term
    logger.debug("bound in n=%d attained by %s", n, best.label)
    return BoundResult(n, BoundStatus.NUMERIC, terms, best, note)


def chain_bound(n: int, dims: Iterable[int], precision_bits: int = DEFAULT_PRECISION) -> BoundResult:
    """Fold sigma(N) >= min(sigma(M), Lambda_{n,k}) along the chain, starting at S^n."""
    if n < 3:
        raise ValueError(f"dimension must be >= 3, got n={n}")
    ks = sorted(set(dims))
    for k in ks:
        if not 0 <= k <= n - 3:
            raise ValueError(f"surgery dimension k={k} outside 0 <= k <= n-3 for n={n}")
    uncovered = [k for k in ks if k != 0 and k in (1, n - 3)]
    if uncovered:
        return BoundResult(
            n, BoundStatus.NOT_COVERED, note=f"no explicit bound for surgery dimensions {uncovered} in n={n}"
        )
    trail = [_sphere_term(n, precision_bits)]
    trail.extend(_lambda_term(n, k, precision_bits) for k in ks if k >= 2)
    return min_of_trail(n, trail)


def _lambda_min_term(n: int, precision_bits: int) -> BoundTerm:
    found = lambda_lower_min(n, precision_bits)
    k = min(found.argmin)
    return BoundTerm(f"Lambda_{{{n},{k}}}", n, found.pow_n, found.value)


def topo_bound(t: TopoInput, precision_bits: int = DEFAULT_PRECISION) -> BoundResult:
    n = t.n
    if isinstance(t.kind, SurgeryChain):
        return chain_bound(n, t.kind.dims, precision_bits)
    if n < 3:
        raise ValueError(f"dimension must be >= 3, got n={n}")
    if t.kind is TopoClass.TWO_CONNECTED_ALPHA_NONZERO:
        return BoundResult(n, BoundStatus.ZERO, note="alpha(M) != 0 forces sigma(M) = 0")
    if t.kind is TopoClass.TWO_CONNECTED_SPIN_BOUNDARY:
        if n < 7:
            raise ValueError(f"spin boundary bound needs n >= 7, got n={n}")
        return min_of_trail(n, [_lambda_min_term(n, precision_bits)], "2-connected spin boundary")
    if t.kind is TopoClass.TWO_CONNECTED_ALPHA_ZERO:
        if n < 7:
            raise ValueError(f"alpha-zero bound needs n >= 7, got n={n}")
        if n == 7:
            return min_of_trail(n, [_lambda_min_term(n, precision_bits)], "every 7-manifold here bounds")
        if n == 8:
            trail = [_lambda_min_term(n, precision_bits), _hp2_surface_term(precision_bits)]
            return min_of_trail(n, trail, "spin bordism generated by boundaries and HP^2")
        if n in (9, 10):
            return BoundResult(n, BoundStatus.NOT_COVERED, note=f"no bound for alpha(M) = 0 in n={n}")
        trail = [_lambda_min_term(n, precision_bits), _hp2_term(n, precision_bits)]
        return min_of_trail(n, trail, "boundaries and total spaces of HP^2 bundles")
    raise ValueError(f"unknown topological class: {t.kind!r}")

