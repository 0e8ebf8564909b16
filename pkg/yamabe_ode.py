"""Radial Yamabe equation on the model spaces M_c^{n,k}.

For u depending only on the distance r to the core of H_c^{k+1}, the
equation a_n Laplace(u) + Scal u = mu u^{p_n - 1} reduces to

    u'' + drift(r) u' = (Scal u - mu u^{p_n - 1}) / a_n,
    drift(r) = k d/dr ln sh_c(r) = k c coth(c r)   (k / r when c = 0),

with the regular center condition u'(0) = 0.  On M_1^{n,k} the function
cosh(r)^{-(n-2)/2} solves it with mu = n(n-1) for every k, which is the
benchmark used throughout the tests.

Solutions are classified by scipy's event machinery:

    CROSSING   u reaches 0 (overshoot),
    DECAYING   u falls below decay_threshold * u0 without crashing,
    GROWING    u exceeds growth_factor * u0,
    BOUNDED    none of the above up to r_max (constants, undershoots).

Only radial solutions are computed, so theorem checks cover that subclass.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import IO, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import simpson, solve_ivp

from exactnum import eval_interval
from invariants import ModelSpace, a_n, model_constants, p_n, sphere_volume

logger = logging.getLogger(__name__)


class SolverError(RuntimeError):
    """The integrator failed (step size underflow, non-finite values)."""


class ShootingError(RuntimeError):
    """The shooting bracket is invalid or bisection did not converge."""


class Classification(str, Enum):
    DECAYING = "decaying"
    CROSSING = "crossing"
    GROWING = "growing"
    BOUNDED = "bounded"


@dataclass(frozen=True)
class SolverSettings:
    """Classification thresholds and sampling for radial solves.

    Attributes:
        decay_threshold: float -- DECAYING below this multiple of u0; 0 disables the event
        growth_factor: float -- GROWING above this multiple of u0
        start_scale: float -- series start at start_scale * max(1, 1/sqrt(alpha))
        sample_step: float -- spacing of the output grid
        atol_ratio: float -- absolute tolerance is tol * u0 * atol_ratio
        crash_factor: float -- at the decay event, u'/u below -crash_factor * rate means a crash
    """

    decay_threshold: float = 1e-6
    growth_factor: float = 10.0
    start_scale: float = 1e-6
    sample_step: float = 0.01
    atol_ratio: float = 1e-8
    crash_factor: float = 4.0


DEFAULT_SETTINGS = SolverSettings()


@dataclass(frozen=True)
class RadialProblem:
    model: ModelSpace
    mu: float
    u0: float

    def __post_init__(self) -> None:
        if not self.u0 > 0:
            raise ValueError(f"u0 must be positive, got {self.u0}")
        if not math.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu}")


@dataclass
class RadialSolution:
    """Sampled trajectory of a radial solve.

    Attributes:
        problem: RadialProblem -- model, mu and center value
        r, u, du: np.ndarray -- samples on a strictly increasing grid starting near 0
        classification: Classification -- outcome of the solve
        r_cross: Optional[float] -- zero of u for CROSSING
        tol: float -- relative tolerance of the integrator
        settings: SolverSettings -- thresholds used
    """

    problem: RadialProblem
    r: np.ndarray
    u: np.ndarray
    du: np.ndarray
    classification: Classification
    r_cross: Optional[float]
    tol: float
    settings: SolverSettings = DEFAULT_SETTINGS

    @property
    def r_max(self) -> float:
        return float(self.r[-1])

    @property
    def samples(self) -> List[Tuple[float, float, float]]:
        return list(zip(self.r.tolist(), self.u.tolist(), self.du.tolist()))

    def tau(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.du / self.u + 0.5 * _drift(self.problem.model, self.r)

    def write_csv(self, stream: IO[str]) -> None:
        writer = csv.writer(stream)
        writer.writerow(["r", "u", "du", "tau"])
        for row in zip(self.r.tolist(), self.u.tolist(), self.du.tolist(), self.tau().tolist()):
            writer.writerow([repr(float(x)) for x in row])


@dataclass
class ShootResult:
    """Bisection outcome; the solutions at the bracket ends are on different sides."""

    u0_star: float
    bracket_width: float
    iterations: int
    solution: RadialSolution
    lo_class: Classification
    hi_class: Classification


@dataclass
class TauProfile:
    r: np.ndarray
    tau: np.ndarray
    tau_inf: float


@dataclass
class NormReport:
    """Weighted integrals of a decaying solution, tails extrapolated from tau_inf.

    Attributes:
        l2: float -- ||u||^2_{L^2}, tail included (inf when divergent)
        l2_tail: float -- extrapolated tail of l2
        l2_converges: bool
        lpn: float -- ||u||^{p_n}_{L^{p_n}}, tail included
        lpn_tail: float
        lpn_converges: bool
        dirichlet: float -- ||du||^2_{L^2}, tail included
        tau_inf: float -- fitted limit of tau
    """

    l2: float
    l2_tail: float
    l2_converges: bool
    lpn: float
    lpn_tail: float
    lpn_converges: bool
    dirichlet: float
    tau_inf: float


@dataclass
class TheoremVerdict:
    model: ModelSpace
    classification: Classification
    assumption_ok: bool
    tau_threshold: float
    delta: float
    tau_inf: Optional[float] = None
    tail_resolved: bool = False
    dichotomy: str = "indeterminate"
    lpn_finite: Optional[bool] = None
    l2_finite: Optional[bool] = None
    growth_exponent: Optional[float] = None
    upper_branch_excluded: bool = False
    functional_ratio: Optional[float] = None
    functional_ok: Optional[bool] = None
    theorem_asserted: bool = False
    theorem_holds: bool = True
    notes: List[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "model": {"n": self.model.n, "k": self.model.k, "c": str(self.model.c)},
            "classification": self.classification.value,
            "assumption_ok": self.assumption_ok,
            "tau_threshold": self.tau_threshold,
            "delta": self.delta,
            "tau_inf": self.tau_inf,
            "tail_resolved": self.tail_resolved,
            "dichotomy": self.dichotomy,
            "lpn_finite": self.lpn_finite,
            "l2_finite": self.l2_finite,
            "growth_exponent": self.growth_exponent,
            "upper_branch_excluded": self.upper_branch_excluded,
            "functional_ratio": self.functional_ratio,
            "functional_ok": self.functional_ok,
            "theorem_asserted": self.theorem_asserted,
            "theorem_holds": self.theorem_holds,
            "notes": list(self.notes),
        }


def _drift(m: ModelSpace, r: np.ndarray) -> np.ndarray:
    c = float(m.c)
    if m.k == 0:
        return np.zeros_like(r)
    if c == 0:
        return m.k / r
    return m.k * c / np.tanh(c * r)


def radial_coefficients(m: ModelSpace, r: float) -> Tuple[float, float]:
    """(drift, Scal) at radius r; the mean curvature term (n-1) H_r equals -drift."""
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    c = float(m.c)
    if m.k == 0:
        drift = 0.0
    elif c == 0:
        drift = m.k / r
    else:
        drift = m.k * c / math.tanh(c * r)
    return drift, float(model_constants(m).scal)


def default_r_max(m: ModelSpace) -> float:
    return max(10.0, 40.0 / math.sqrt(float(model_constants(m).alpha)))


def _decay_rate(m: ModelSpace, alpha: float) -> float:
    return math.sqrt(alpha) + 0.5 * m.k * float(m.c)


def integrate(
    p: RadialProblem,
    r_max: float,
    tol: float = 1e-10,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> RadialSolution:
    """Integrate from the regular center with DOP853 and classify the trajectory."""
    if not r_max > 0:
        raise ValueError(f"r_max must be positive, got {r_max}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    m = p.model
    consts = model_constants(m)
    n, k, c = m.n, m.k, float(m.c)
    scal, alpha = float(consts.scal), float(consts.alpha)
    a, pw = float(a_n(n)), float(p_n(n))
    mu, u0 = float(p.mu), float(p.u0)

    eps = settings.start_scale * max(1.0, 1.0 / math.sqrt(alpha))
    if r_max <= eps:
        raise ValueError(f"r_max={r_max} does not exceed the series start {eps}")
    u2 = (scal * u0 - mu * u0 ** (pw - 1)) / (a * (k + 1))
    y0 = [u0 + 0.5 * u2 * eps**2, u2 * eps]

    def rhs(r: float, y: np.ndarray) -> List[float]:
        u, du = y
        if k == 0:
            drift = 0.0
        elif c == 0:
            drift = k / r
        else:
            drift = k * c / math.tanh(c * r)
        return [du, (scal * u - mu * abs(u) ** (pw - 2) * u) / a - drift * du]

    def crossing(r: float, y: np.ndarray) -> float:
        return y[0]

    def growth(r: float, y: np.ndarray) -> float:
        return y[0] - settings.growth_factor * u0

    def decay(r: float, y: np.ndarray) -> float:
        return y[0] - settings.decay_threshold * u0

    crossing.terminal, crossing.direction = True, -1
    growth.terminal, growth.direction = True, 1
    decay.terminal, decay.direction = True, -1

    atol = tol * u0 * settings.atol_ratio
    segments = []
    events = [crossing, growth]
    if settings.decay_threshold > 0:
        events.append(decay)
    start, state = eps, y0
    classification, r_cross = Classification.BOUNDED, None
    while True:
        sol = solve_ivp(rhs, (start, r_max), state, method="DOP853", rtol=tol, atol=atol,
                        events=events, dense_output=True)
        if sol.status == -1:
            raise SolverError(f"integration failed for {m} at u0={u0}: {sol.message}")
        if not np.all(np.isfinite(sol.y)):
            raise SolverError(f"non-finite values for {m} at u0={u0}")
        segments.append((start, float(sol.t[-1]), sol.sol))
        if sol.t_events[0].size:
            classification, r_cross = Classification.CROSSING, float(sol.t_events[0][0])
        elif sol.t_events[1].size:
            classification = Classification.GROWING
        elif len(events) == 3 and sol.t_events[2].size:
            r_e = float(sol.t_events[2][0])
            u_e, du_e = sol.y_events[2][0]
            if du_e / u_e >= -settings.crash_factor * (_decay_rate(m, alpha) + 0.5 * k / r_e):
                classification = Classification.DECAYING
            else:
                # steep drop through the threshold: keep going until the crossing
                events = events[:2]
                start, state = r_e, [u_e, du_e]
                continue
        break

    r_end = segments[-1][1]
    r_grid = _sample_grid(eps, r_end, settings.sample_step)
    values = np.empty((2, r_grid.size))
    for seg_start, seg_end, dense in segments:
        mask = (r_grid >= seg_start) & (r_grid <= seg_end)
        if mask.any():
            values[:, mask] = dense(r_grid[mask])
    logger.debug("%s mu=%g u0=%.17g: %s at r=%.4g", m, mu, u0, classification.value, r_end)
    return RadialSolution(p, r_grid, values[0], values[1], classification, r_cross, tol, settings)


def _sample_grid(eps: float, r_end: float, step: float) -> np.ndarray:
    head_end = min(step, r_end)
    head = np.geomspace(eps, head_end, 32, endpoint=False)
    body = np.arange(head_end, r_end, step)
    if body.size and r_end - body[-1] < 1e-3 * step:
        body = body[:-1]
    return np.concatenate([head, body, [r_end]])


def _side(p: RadialProblem, r_max: float, tol: float, settings: SolverSettings) -> Tuple[int, Classification]:
    s = integrate(p, r_max, tol, replace(settings, decay_threshold=0.0))
    return (1 if s.classification is Classification.CROSSING else -1), s.classification


def shoot(
    m: ModelSpace,
    mu: float,
    bracket: Tuple[float, float],
    tol: float = 1e-13,
    *,
    r_max: Optional[float] = None,
    solver_tol: float = 1e-12,
    max_iter: int = 200,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> ShootResult:
    """Bisect on u0 between overshoot (CROSSING) and undershoot (anything else)."""
    lo, hi = sorted(float(x) for x in bracket)
    if not lo > 0:
        raise ValueError(f"bracket must be positive, got {bracket}")
    r_max = default_r_max(m) if r_max is None else r_max
    side_lo, lo_class = _side(RadialProblem(m, mu, lo), r_max, solver_tol, settings)
    side_hi, hi_class = _side(RadialProblem(m, mu, hi), r_max, solver_tol, settings)
    if side_lo == side_hi:
        raise ShootingError(f"both bracket ends of {m} ({lo}, {hi}) are {lo_class.value}/{hi_class.value}")
    iterations = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        iterations += 1
        if iterations > max_iter:
            raise ShootingError(f"no convergence for {m} within {max_iter} bisections")
        side, cls = _side(RadialProblem(m, mu, mid), r_max, solver_tol, settings)
        if side == side_lo:
            lo, lo_class = mid, cls
        else:
            hi, hi_class = mid, cls
    u0_star = 0.5 * (lo + hi)
    solution = integrate(RadialProblem(m, mu, u0_star), r_max, solver_tol, settings)
    logger.info("shoot %s mu=%g: u0*=%.15g after %d bisections (%s)", m, mu, u0_star, iterations,
                solution.classification.value)
    return ShootResult(u0_star, hi - lo, iterations, solution, lo_class, hi_class)


def find_bracket(
    m: ModelSpace,
    mu: float,
    u0_values: Optional[Sequence[float]] = None,
    *,
    r_max: Optional[float] = None,
    solver_tol: float = 1e-10,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> Optional[Tuple[float, float]]:
    """First adjacent pair of a u0 grid whose solutions lie on different sides."""
    values = np.geomspace(1e-2, 1e2, 17) if u0_values is None else np.asarray(u0_values, dtype=float)
    r_max = default_r_max(m) if r_max is None else r_max
    previous = None
    for u0 in values:
        try:
            side, _ = _side(RadialProblem(m, mu, float(u0)), r_max, solver_tol, settings)
        except SolverError as err:
            logger.warning("bracket search for %s skipped u0=%g: %s", m, u0, err)
            previous = None
            continue
        if previous is not None and side != previous[1]:
            return previous[0], float(u0)
        previous = (float(u0), side)
    logger.info("no shooting bracket for %s at mu=%g", m, mu)
    return None


def _fit_tail(r: np.ndarray, tau: np.ndarray) -> float:
    """Linear fit over the last quarter of the r-range, evaluated at its end."""
    window = r >= r[0] + 0.75 * (r[-1] - r[0])
    if np.count_nonzero(window) < 2:
        return float(tau[-1])
    slope, intercept = np.polyfit(r[window], tau[window], 1)
    return float(slope * r[-1] + intercept)


def tau_profile(s: RadialSolution) -> TauProfile:
    """tau = (ln omega)' with omega^2 = u^2 vol(F_r), and its fitted limit."""
    if s.classification is not Classification.DECAYING:
        raise ValueError(f"tau_profile needs a decaying solution, got {s.classification.value}")
    tau = s.tau()
    return TauProfile(s.r, tau, _fit_tail(s.r, tau))


def _fiber_volume(m: ModelSpace) -> float:
    omega_k = 2.0 if m.k == 0 else float(eval_interval(sphere_volume(m.k)).mid)
    return omega_k * float(eval_interval(sphere_volume(m.fiber_dim)).mid)


def _weight(m: ModelSpace, r: np.ndarray) -> np.ndarray:
    c = float(m.c)
    sh = r if c == 0 else np.sinh(c * r) / c
    return _fiber_volume(m) * sh**m.k


def _tail_rate(m: ModelSpace, q: float, tau_inf: float, r_end: float) -> float:
    """Exponential rate of u^q vol(F_r) beyond the last sample."""
    k, c = m.k, float(m.c)
    rate = q * tau_inf + k * c * (1 - q / 2)
    if c == 0:
        rate += k * (1 - q / 2) / r_end
    return rate


def _with_tail(body: float, edge: float, rate: float) -> Tuple[float, float, bool]:
    if rate < 0:
        tail = edge / -rate
        return body + tail, tail, True
    return math.inf, math.inf, False


def norms(s: RadialSolution) -> NormReport:
    profile = tau_profile(s)
    if not profile.tau_inf < 0:
        raise ValueError(f"norms need a negative tail exponent, got tau_inf={profile.tau_inf}")
    m = s.problem.model
    pw = float(p_n(m.n))
    w = _weight(m, s.r)
    u = np.clip(s.u, 0.0, None)
    r_end = s.r_max
    rate2 = _tail_rate(m, 2.0, profile.tau_inf, r_end)
    ratep = _tail_rate(m, pw, profile.tau_inf, r_end)
    l2, l2_tail, l2_ok = _with_tail(float(simpson(u**2 * w, x=s.r)), float(u[-1] ** 2 * w[-1]), rate2)
    lpn, lpn_tail, lpn_ok = _with_tail(float(simpson(u**pw * w, x=s.r)), float(u[-1] ** pw * w[-1]), ratep)
    dirichlet, _, _ = _with_tail(float(simpson(s.du**2 * w, x=s.r)), float(s.du[-1] ** 2 * w[-1]), rate2)
    return NormReport(l2, l2_tail, l2_ok, lpn, lpn_tail, lpn_ok, dirichlet, profile.tau_inf)


def growth_exponent(m: ModelSpace, gamma: Fraction) -> Fraction:
    """b = p_n gamma - 2 k |c| / (n - 2); u^{p_n} vol(F_r) grows like e^{b r} on the upper branch."""
    return p_n(m.n) * Fraction(gamma) - Fraction(2 * m.k, m.n - 2) * m.c


def theorem_check(s: RadialSolution, functional_tolerance: float = 0.005) -> TheoremVerdict:
    """Check the L^{p_n} => L^2 implication and its proof ingredients on one solution."""
    m = s.problem.model
    consts = model_constants(m)
    thr = float(consts.tau_threshold)
    alpha = float(consts.alpha)
    verdict = TheoremVerdict(
        model=m,
        classification=s.classification,
        assumption_ok=consts.assumption_ok,
        tau_threshold=thr,
        delta=0.02 * thr,
        upper_branch_excluded=growth_exponent(m, consts.tau_threshold) > 0,
    )
    if not consts.assumption_ok:
        verdict.notes.append("2k|c| < n(n-k-2) fails; theorem not asserted")
    if s.classification is Classification.CROSSING:
        verdict.notes.append(f"u changes sign at r={s.r_cross:.6g}; not a positive solution")
        return verdict

    positive = s.u > 0
    r, tau = s.r[positive], s.tau()[positive]
    verdict.tau_inf = _fit_tail(r, tau)
    verdict.tail_resolved = bool((r[-1] - r[0]) * _decay_rate(m, alpha) >= 5.0)
    verdict.growth_exponent = float(growth_exponent(m, Fraction(abs(verdict.tau_inf))))
    if verdict.tail_resolved:
        if verdict.tau_inf <= -thr + verdict.delta:
            verdict.dichotomy = "lower"
        elif verdict.tau_inf >= thr - verdict.delta:
            verdict.dichotomy = "upper"
        else:
            verdict.notes.append("tau_inf inside the gap; u does not vanish at infinity")
    else:
        verdict.notes.append("tail too short to resolve tau_inf")

    pw = float(p_n(m.n))
    if s.classification is Classification.DECAYING and verdict.tau_inf < 0:
        report = norms(s)
        verdict.lpn_finite = bool(report.lpn_converges)
        verdict.l2_finite = bool(report.l2_converges)
        if report.l2_converges and report.lpn_converges:
            scal, a, mu = float(consts.scal), float(a_n(m.n)), float(s.problem.mu)
            verdict.functional_ratio = float((a * report.dirichlet + scal * report.l2) / (mu * report.lpn))
            verdict.functional_ok = abs(verdict.functional_ratio - 1.0) <= functional_tolerance
    else:
        verdict.lpn_finite = bool(_tail_rate(m, pw, verdict.tau_inf, s.r_max) < 0)
        verdict.l2_finite = bool(_tail_rate(m, 2.0, verdict.tau_inf, s.r_max) < 0)

    verdict.theorem_asserted = consts.assumption_ok and bool(verdict.lpn_finite)
    verdict.theorem_holds = not verdict.theorem_asserted or bool(verdict.l2_finite)
    return verdict
