"""Bulk verification of the large-n numerical claims.

Three claims are checked over ranges of n:

* min-k: Lambda_{n,>=2} is attained at k = 2 (and its mirror k = n-4),
* compare: lambda_n < Lambda_{n,>=2} for n in {11, 12} and lambda_n >= Lambda_{n,>=2} beyond,
* ratio: lambda_n^n >= 1.43 Lambda_{n,2}^n.

All decisions are exact comparisons of n-th powers. For n above
`log_threshold` the comparisons are screened in log space with outward-rounded
float enclosures of ln nu_ell; any comparison the screen cannot separate falls
back to exact monomial arithmetic.
"""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, partial
from multiprocessing import Pool
from typing import Callable, Dict, IO, List, Optional, Sequence, Tuple

import numpy as np
from mpmath import iv, libmp

from exactnum import (
    DEFAULT_PRECISION,
    CertifiedInterval,
    Ordering,
    PiMonomial,
    eval_interval,
    interval_precision,
    ln_interval,
    monomial_compare,
    root_interval,
)
from invariants import HP2_CONSTANT, a_n, lambda_hp2_power, lambda_lower_power, nu

logger = logging.getLogger(__name__)

LOG_THRESHOLD = 500
RATIO_TARGET = Fraction(143, 100)


@dataclass
class ScanReport:
    """Outcome of a ranged scan.

    Attributes:
        claim: str -- "min-k", "compare" or "ratio"
        n_range: Tuple[int, int] -- inclusive range scanned
        violations: List[Tuple[int, str]] -- (n, detail) for every n where the claim fails
        per_n: List[Dict] -- per-n records, ordered by n
        wall_time: float -- seconds
    """

    claim: str
    n_range: Tuple[int, int]
    violations: List[Tuple[int, str]] = field(default_factory=list)
    per_n: List[Dict[str, object]] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def holds(self) -> bool:
        return not self.violations

    def to_json(self, sig_digits: int = 10) -> Dict[str, object]:
        return {
            "claim": self.claim,
            "range": list(self.n_range),
            "holds": self.holds,
            "violations": [{"n": n, "detail": detail} for n, detail in self.violations],
            "per_n": [_row_json(row, sig_digits) for row in self.per_n],
            "wall_time": self.wall_time,
        }

    def write_csv(self, stream: IO[str], sig_digits: int = 10) -> None:
        rows = [_row_json(row, sig_digits, flat=True) for row in self.per_n]
        columns: List[str] = []
        for row in rows:
            columns.extend(key for key in row if key not in columns)
        writer = csv.DictWriter(stream, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)


def _row_json(row: Dict[str, object], sig_digits: int, flat: bool = False) -> Dict[str, object]:
    out: Dict[str, object] = {}
    for key, value in row.items():
        if isinstance(value, CertifiedInterval):
            out[key] = value.to_decimal(sig_digits)
            if not flat:
                out[f"{key}_interval"] = value.to_json()
        elif isinstance(value, (list, tuple, frozenset, set)):
            out[key] = " ".join(str(v) for v in sorted(value)) if flat else sorted(value)
        else:
            out[key] = value
    return out


@dataclass(frozen=True)
class LogNuTable:
    """Outward-rounded float enclosures lo[ell] <= ln nu_ell <= hi[ell] for 3 <= ell <= ell_max."""

    ell_max: int
    precision_bits: int
    lo: np.ndarray
    hi: np.ndarray


def _down(x: object) -> float:
    return libmp.to_float(x._mpi_[0], rnd=libmp.round_floor)


def _up(x: object) -> float:
    return libmp.to_float(x._mpi_[1], rnd=libmp.round_ceiling)


@lru_cache(maxsize=4)
def log_nu_table(ell_max: int, precision_bits: int = DEFAULT_PRECISION) -> LogNuTable:
    """Build the table from ln Gamma at half-integers via Gamma(x+1) = x Gamma(x)."""
    lo = np.full(ell_max + 1, -np.inf)
    hi = np.full(ell_max + 1, -np.inf)
    with interval_precision(precision_bits):
        ln2 = iv.log(2)
        ln_pi = iv.log(+iv.pi)
        # ln_gamma[m] = ln Gamma(m/2)
        ln_gamma = [iv.mpf(0)] * (ell_max + 2)
        ln_gamma[1] = ln_pi / 2
        for m in range(3, ell_max + 2):
            ln_gamma[m] = ln_gamma[m - 2] + iv.log(iv.mpf(m - 2)) - ln2
        for ell in range(3, ell_max + 1):
            ln_omega = ln2 + ln_pi * (ell + 1) / 2 - ln_gamma[ell + 1]
            ln_nu = 2 * ln_omega + ell * (iv.log(iv.mpf(ell - 2)) - 2 * ln2)
            lo[ell] = _down(ln_nu)
            hi[ell] = _up(ln_nu)
    logger.debug("built ln nu table up to ell=%d at %d bits", ell_max, precision_bits)
    return LogNuTable(ell_max, precision_bits, lo, hi)


def _pair_sum(table: LogNuTable, a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    lo = np.nextafter(table.lo[a] + table.lo[b], -np.inf)
    hi = np.nextafter(table.hi[a] + table.hi[b], np.inf)
    return lo, hi


def _root_from_log(n: int, log_lo: float, log_hi: float, precision_bits: int) -> CertifiedInterval:
    """(n a_n) * exp(S / n) for ln-enclosure S = [log_lo, log_hi]."""
    scale = n * a_n(n)
    with interval_precision(precision_bits):
        s = iv.mpf([log_lo, log_hi])
        value = iv.mpf(scale.numerator) / scale.denominator * iv.exp(s / n)
        return CertifiedInterval.from_iv(value, precision_bits)


def _nu_pair(n: int, k: int) -> PiMonomial:
    return nu(k + 1) * nu(n - k - 1)


@lru_cache(maxsize=8192)
def _nu_enclosure(ell: int, precision_bits: int) -> CertifiedInterval:
    return eval_interval(nu(ell), precision_bits)


def _exact_min_location(n: int, ks: Sequence[int]) -> Tuple[List[int], List[int]]:
    """(argmin, ks that beat k = 2), deciding every k in `ks` against k = 2 exactly."""
    ref = _nu_pair(n, 2)
    ties: List[int] = []
    beating: List[Tuple[int, PiMonomial]] = []
    for k in ks:
        power = _nu_pair(n, k)
        order = monomial_compare(power, ref)
        if order is Ordering.LESS:
            beating.append((k, power))
        elif order is Ordering.EQUAL:
            ties.append(k)
    if not beating:
        return [2] + ties, []
    best, best_power = [beating[0][0]], beating[0][1]
    for k, power in beating[1:]:
        order = monomial_compare(power, best_power)
        if order is Ordering.LESS:
            best, best_power = [k], power
        elif order is Ordering.EQUAL:
            best.append(k)
    return best, [k for k, _ in beating]


def _screen_interval(n: int, ks: np.ndarray, precision_bits: int) -> Tuple[List[int], List[int]]:
    """Split candidates into (certainly below k = 2, undecided) with multiprecision enclosures."""
    enclosures = {ell: _nu_enclosure(ell, precision_bits) for ell in range(3, n - 2)}
    beats: List[int] = []
    undecided: List[int] = []
    with interval_precision(precision_bits):
        ref = CertifiedInterval.from_iv(enclosures[3].as_iv() * enclosures[n - 3].as_iv(), precision_bits)
        for k in ks.tolist():
            pair = enclosures[k + 1].as_iv() * enclosures[n - k - 1].as_iv()
            value = CertifiedInterval.from_iv(pair, precision_bits)
            if value.hi < ref.lo:
                beats.append(k)
            elif not value.lo > ref.hi:
                undecided.append(k)
    return beats, undecided


def _screen_log(n: int, ks: np.ndarray, table: LogNuTable) -> Tuple[List[int], List[int]]:
    """Same split from the float ln nu table."""
    ref_lo, ref_hi = _pair_sum(table, np.array([3]), np.array([n - 3]))
    s_lo, s_hi = _pair_sum(table, ks + 1, n - ks - 1)
    beats = s_hi < ref_lo[0]
    undecided = ~beats & ~(s_lo > ref_hi[0])
    return ks[beats].tolist(), ks[undecided].tolist()


def _min_location_at(n: int, ell_max: int, precision_bits: int, log_threshold: int) -> Dict[str, object]:
    ks = np.arange(3, (n - 2) // 2 + 1)
    if n <= log_threshold:
        beats, undecided = _screen_interval(n, ks, precision_bits)
        path = "interval"
    else:
        beats, undecided = _screen_log(n, ks, log_nu_table(ell_max, precision_bits))
        path = "log"
    best, beating = [2], []
    if beats or undecided:
        logger.info("n=%d: %d candidates below k=2, %d undecided; deciding exactly", n, len(beats), len(undecided))
        path += "+exact"
        best, beating = _exact_min_location(n, ks.tolist() if beats else undecided)
        if beating and not beats:
            best, beating = _exact_min_location(n, ks.tolist())
    argmin = sorted(set(best) | {n - 2 - k for k in best})
    return {"n": n, "argmin": argmin, "beating": beating, "path": path}


def _parallel_map(func: Callable[[int], Dict[str, object]], ns: Sequence[int], workers: int) -> List[Dict[str, object]]:
    if workers <= 1 or len(ns) < 2:
        return [func(n) for n in ns]
    chunksize = max(1, len(ns) // (workers * 8))
    with Pool(processes=workers) as pool:
        return pool.map(func, ns, chunksize=chunksize)


def _check_range(n_lo: int, n_hi: int, minimum: int) -> None:
    if not minimum <= n_lo <= n_hi:
        raise ValueError(f"invalid range {n_lo}..{n_hi}: need {minimum} <= n_lo <= n_hi")


def scan_min_location(
    n_lo: int,
    n_hi: int,
    *,
    workers: int = 1,
    precision_bits: int = DEFAULT_PRECISION,
    log_threshold: int = LOG_THRESHOLD,
) -> ScanReport:
    """Verify argmin_k Lambda_{n,k} is contained in {2, n-4} for every n in the range."""
    _check_range(n_lo, n_hi, 7)
    start = time.perf_counter()
    func = partial(_min_location_at, ell_max=n_hi, precision_bits=precision_bits, log_threshold=log_threshold)
    rows = _parallel_map(func, list(range(n_lo, n_hi + 1)), workers)
    report = ScanReport("min-k", (n_lo, n_hi), per_n=rows)
    for row in rows:
        n = row["n"]
        extra = [k for k in row["argmin"] if k not in (2, n - 4)]
        if row["beating"] or extra:
            report.violations.append((n, f"k={row['beating'] or extra} attains a smaller value than k=2"))
    report.wall_time = time.perf_counter() - start
    logger.info("min-k scan %d..%d: %d violations in %.2fs", n_lo, n_hi, len(report.violations), report.wall_time)
    return report


def _expected_relation(n: int) -> Tuple[Ordering, ...]:
    if n in (11, 12):
        return (Ordering.LESS,)
    return (Ordering.GREATER, Ordering.EQUAL)


def _compare_at(n: int, ell_max: int, precision_bits: int, log_threshold: int) -> Dict[str, object]:
    location = _min_location_at(n, ell_max, precision_bits, log_threshold)
    k_star = min(location["argmin"])
    relation: Optional[Ordering] = None
    if n > log_threshold:
        table = log_nu_table(ell_max, precision_bits)
        c_ln = ln_interval(HP2_CONSTANT, precision_bits)
        c_lo = libmp.to_float(c_ln.lo._mpf_, rnd=libmp.round_floor)
        c_hi = libmp.to_float(c_ln.hi._mpf_, rnd=libmp.round_ceiling)
        hp_lo = np.nextafter(c_lo + table.lo[n - 8], -np.inf)
        hp_hi = np.nextafter(c_hi + table.hi[n - 8], np.inf)
        lam_lo, lam_hi = _pair_sum(table, np.array([k_star + 1]), np.array([n - k_star - 1]))
        if hp_hi < lam_lo[0]:
            relation = Ordering.LESS
        elif hp_lo > lam_hi[0]:
            relation = Ordering.GREATER
        hp_value = _root_from_log(n, float(hp_lo), float(hp_hi), precision_bits)
        lam_value = _root_from_log(n, float(lam_lo[0]), float(lam_hi[0]), precision_bits)
    else:
        hp_value = root_interval(lambda_hp2_power(n), n, precision_bits)
        lam_value = root_interval(lambda_lower_power(n, k_star), n, precision_bits)
    if relation is None:
        relation = monomial_compare(HP2_CONSTANT * nu(n - 8), _nu_pair(n, k_star))
    return {
        "n": n,
        "relation": relation.value,
        "k_star": k_star,
        "lambda_hp2": hp_value,
        "lambda_min": lam_value,
    }


def compare_series(
    n_lo: int,
    n_hi: int,
    *,
    workers: int = 1,
    precision_bits: int = DEFAULT_PRECISION,
    log_threshold: int = LOG_THRESHOLD,
) -> ScanReport:
    """Certified relation between lambda_n and Lambda_{n,>=2} for every n in the range."""
    _check_range(n_lo, n_hi, 11)
    start = time.perf_counter()
    func = partial(_compare_at, ell_max=n_hi, precision_bits=precision_bits, log_threshold=log_threshold)
    rows = _parallel_map(func, list(range(n_lo, n_hi + 1)), workers)
    report = ScanReport("compare", (n_lo, n_hi), per_n=rows)
    for row in rows:
        n = row["n"]
        relation = Ordering(row["relation"])
        if relation not in _expected_relation(n):
            report.violations.append((n, f"lambda_n {relation.value} Lambda_{{n,>=2}}"))
    report.wall_time = time.perf_counter() - start
    logger.info("compare scan %d..%d: %d violations in %.2fs", n_lo, n_hi, len(report.violations), report.wall_time)
    return report


def ratio_monomial(n: int) -> PiMonomial:
    """lambda_n^n / Lambda_{n,2}^n = (mu(HP^2)/(8 a_8))^8 nu_{n-8} / (nu_3 nu_{n-3})."""
    if n < 11:
        raise ValueError(f"ratio needs n >= 11, got {n}")
    return HP2_CONSTANT * nu(n - 8) / _nu_pair(n, 2)


def ratio_certificate(n: int, precision_bits: int = DEFAULT_PRECISION) -> Tuple[bool, CertifiedInterval]:
    """Whether lambda_n^n >= 1.43 Lambda_{n,2}^n, with an enclosure of the ratio."""
    ratio = ratio_monomial(n)
    holds = monomial_compare(ratio, PiMonomial(RATIO_TARGET)) is not Ordering.LESS
    return holds, eval_interval(ratio, precision_bits)


def _ratio_at(n: int, precision_bits: int) -> Dict[str, object]:
    holds, ratio = ratio_certificate(n, precision_bits)
    return {"n": n, "holds": holds, "ratio": ratio}


def ratio_scan(n_lo: int, n_hi: int, *, workers: int = 1, precision_bits: int = DEFAULT_PRECISION) -> ScanReport:
    _check_range(n_lo, n_hi, 11)
    start = time.perf_counter()
    rows = _parallel_map(partial(_ratio_at, precision_bits=precision_bits), list(range(n_lo, n_hi + 1)), workers)
    report = ScanReport("ratio", (n_lo, n_hi), per_n=rows)
    for row in rows:
        if not row["holds"]:
            report.violations.append((row["n"], f"ratio below {RATIO_TARGET}"))
    report.wall_time = time.perf_counter() - start
    return report
