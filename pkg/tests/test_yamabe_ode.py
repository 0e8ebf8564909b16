"""Radial solver, shooting and the L^p => L^2 checks.

On M_1^{n,k} (and on M_c^{n,0} for any c) u = cosh(r)^{-(n-2)/2} solves the
equation with mu = n(n-1), which gives exact references.
"""

from __future__ import annotations

import io
import json
import math
from fractions import Fraction

import numpy as np
import pytest

from invariants import ModelSpace, p_n
from yamabe_ode import (
    Classification,
    RadialProblem,
    ShootingError,
    SolverSettings,
    find_bracket,
    integrate,
    norms,
    radial_coefficients,
    shoot,
    growth_exponent,
    tau_profile,
    theorem_check,
)

BENCHMARK = ModelSpace(7, 2, Fraction(1))
MU = 42.0


def cosh_profile(n, r):
    return np.cosh(r) ** (-(n - 2) / 2)


@pytest.fixture(scope="module")
def benchmark_shot():
    return shoot(BENCHMARK, MU, (0.5, 2.0))


def test_radial_coefficients():
    drift, scal = radial_coefficients(BENCHMARK, 1.0)
    assert drift == pytest.approx(2 / math.tanh(1.0))
    assert scal == 6.0
    assert radial_coefficients(ModelSpace(7, 2, Fraction(0)), 2.0)[0] == pytest.approx(1.0)
    assert radial_coefficients(ModelSpace(7, 0, Fraction(1)), 2.0)[0] == 0.0
    with pytest.raises(ValueError):
        radial_coefficients(BENCHMARK, 0.0)


def test_invalid_problems():
    with pytest.raises(ValueError):
        RadialProblem(BENCHMARK, MU, 0.0)
    with pytest.raises(ValueError):
        RadialProblem(BENCHMARK, math.inf, 1.0)
    with pytest.raises(ValueError):
        integrate(RadialProblem(BENCHMARK, MU, 1.0), r_max=-1.0)
    with pytest.raises(ValueError):
        integrate(RadialProblem(BENCHMARK, MU, 1.0), r_max=5.0, tol=0.0)


@pytest.mark.parametrize("model, mu", [
    (BENCHMARK, MU),
    (ModelSpace(8, 2, Fraction(1)), 56.0),
    (ModelSpace(9, 3, Fraction(1)), 72.0),
    (ModelSpace(7, 0, Fraction(1, 2)), MU),
    (ModelSpace(6, 0, Fraction(0)), 30.0),
])
def test_cosh_profile_from_exact_center(model, mu):
    s = integrate(RadialProblem(model, mu, 1.0), r_max=3.0, tol=1e-12)
    assert s.classification is Classification.BOUNDED
    assert np.max(np.abs(s.u - cosh_profile(model.n, s.r))) < 1e-6


def test_tolerance_convergence():
    p = RadialProblem(BENCHMARK, MU, 1.0)
    errors = []
    for tol in (1e-6, 1e-10):
        s = integrate(p, r_max=3.0, tol=tol)
        errors.append(np.max(np.abs(s.u - cosh_profile(7, s.r))))
    assert errors[1] * 4 <= errors[0]


def test_constant_solution_stays_constant():
    u_const = (6.0 / MU) ** (1.0 / float(p_n(7) - 2))
    s = integrate(RadialProblem(BENCHMARK, MU, u_const), r_max=20.0, tol=1e-12)
    assert s.classification is Classification.BOUNDED
    assert np.max(np.abs(s.u - u_const)) / u_const < 1e-8


def test_overshoot_crosses():
    s = integrate(RadialProblem(BENCHMARK, MU, 2.0), r_max=20.0)
    assert s.classification is Classification.CROSSING
    assert s.r_cross is not None and 0 < s.r_cross < 20.0
    verdict = theorem_check(s)
    assert not verdict.theorem_asserted
    assert verdict.notes


def test_shoot_recovers_cosh(benchmark_shot):
    s = benchmark_shot.solution
    assert benchmark_shot.u0_star == pytest.approx(1.0, abs=1e-6)
    assert benchmark_shot.lo_class is not Classification.CROSSING
    assert benchmark_shot.hi_class is Classification.CROSSING
    assert s.classification is Classification.DECAYING
    assert np.max(np.abs(s.u - cosh_profile(7, s.r))) / benchmark_shot.u0_star < 1e-5


@pytest.mark.parametrize("model, mu", [
    (ModelSpace(8, 2, Fraction(1)), 56.0),
    (ModelSpace(9, 3, Fraction(1)), 72.0),
])
def test_shoot_recovers_cosh_in_higher_dimensions(model, mu):
    result = shoot(model, mu, (0.5, 2.0))
    assert result.u0_star == pytest.approx(1.0, abs=1e-4)
    assert result.solution.classification is Classification.DECAYING
    threshold = (model.n - model.k - 2) / 2
    assert tau_profile(result.solution).tau_inf == pytest.approx(-threshold, rel=0.01)


def test_tail_law_and_lower_branch_below_c_one():
    # alpha = 3/8; u decays like exp(-(sqrt(alpha) + k c / 2) r)
    model = ModelSpace(7, 4, Fraction(1, 2))
    settings = SolverSettings(decay_threshold=1e-5)
    bracket = find_bracket(model, 42.0, settings=settings)
    assert bracket is not None
    result = shoot(model, 42.0, bracket, settings=settings)
    assert result.solution.classification is Classification.DECAYING
    verdict = theorem_check(result.solution)
    assert verdict.tau_inf == pytest.approx(-math.sqrt(3 / 8), rel=0.02)
    assert verdict.tail_resolved
    assert verdict.dichotomy == "lower"


def test_growing_branch_reaches_upper_threshold():
    # linear regime: u ~ sinh(3r/2) / sinh(r), so tau = (3/2) coth(3r/2)
    settings = SolverSettings(growth_factor=1e4)
    s = integrate(RadialProblem(BENCHMARK, MU, 1e-12), r_max=40.0, tol=1e-10, settings=settings)
    assert s.classification is Classification.GROWING
    assert s.tau()[-1] >= 1.5 - 0.05


def test_shoot_scaling_covariance():
    # lambda * u solves the equation with mu * lambda^{-(p_n - 2)}
    mu_scaled = MU * 2.0 ** -float(p_n(7) - 2)
    result = shoot(BENCHMARK, mu_scaled, (1.0, 4.0))
    assert result.u0_star == pytest.approx(2.0, abs=2e-6)


def test_shoot_rejects_same_side_bracket():
    with pytest.raises(ShootingError):
        shoot(BENCHMARK, MU, (1.5, 2.0))
    with pytest.raises(ValueError):
        shoot(BENCHMARK, MU, (0.0, 2.0))


def test_find_bracket_contains_benchmark():
    bracket = find_bracket(BENCHMARK, MU)
    assert bracket is not None
    lo, hi = bracket
    assert lo - 1e-9 <= 1.0 <= hi + 1e-9


def test_tau_profile_requires_decay():
    s = integrate(RadialProblem(BENCHMARK, MU, 0.5), r_max=10.0)
    with pytest.raises(ValueError):
        tau_profile(s)


def test_benchmark_norms(benchmark_shot):
    report = norms(benchmark_shot.solution)
    assert report.lpn_converges and report.l2_converges
    assert report.lpn == pytest.approx(math.pi**4 / 3, rel=1e-4)
    assert report.l2 == pytest.approx(2 * math.pi**4 / 3, rel=1e-4)
    assert report.dirichlet == pytest.approx(25 * math.pi**4 / 12, rel=1e-3)
    assert report.tau_inf == pytest.approx(-1.5, abs=0.015)


def test_benchmark_theorem_verdict(benchmark_shot):
    verdict = theorem_check(benchmark_shot.solution)
    assert verdict.classification is Classification.DECAYING
    assert verdict.tail_resolved
    assert verdict.dichotomy == "lower"
    assert verdict.lpn_finite and verdict.l2_finite
    assert verdict.functional_ok
    assert verdict.theorem_asserted and verdict.theorem_holds
    assert verdict.upper_branch_excluded
    assert verdict.to_json()["model"] == {"n": 7, "k": 2, "c": "1"}
    assert type(verdict.tail_resolved) is bool and type(verdict.l2_finite) is bool
    assert json.loads(json.dumps(verdict.to_json()))["dichotomy"] == "lower"


def test_constant_solution_verdict():
    u_const = (6.0 / MU) ** (1.0 / float(p_n(7) - 2))
    s = integrate(RadialProblem(BENCHMARK, MU, u_const), r_max=20.0, tol=1e-12)
    verdict = theorem_check(s)
    assert verdict.tau_inf == pytest.approx(1.0, abs=0.05)
    assert verdict.dichotomy == "indeterminate"
    assert verdict.lpn_finite is False
    assert not verdict.theorem_asserted and verdict.theorem_holds
    assert json.loads(json.dumps(verdict.to_json()))["l2_finite"] is False


def test_growth_exponent():
    assert growth_exponent(BENCHMARK, Fraction(3, 2)) == Fraction(17, 5)
    assert growth_exponent(ModelSpace(7, 2, Fraction(0)), Fraction(3, 2)) == Fraction(21, 5)


def test_trajectory_csv(benchmark_shot):
    stream = io.StringIO()
    benchmark_shot.solution.write_csv(stream)
    lines = stream.getvalue().splitlines()
    assert lines[0] == "r,u,du,tau"
    assert len(lines) == len(benchmark_shot.solution.r) + 1


@pytest.mark.slow
@pytest.mark.parametrize("n", range(4, 10))
def test_theorem_on_model_grid(n):
    settings = SolverSettings(decay_threshold=1e-5)
    mu = float(n * (n - 1))
    checked = 0
    for k in range(0, n - 2):
        for c in (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1)):
            model = ModelSpace(n, k, c)
            bracket = find_bracket(model, mu, settings=settings)
            if bracket is None:
                continue
            try:
                result = shoot(model, mu, bracket, settings=settings)
            except ShootingError:
                continue
            if result.solution.classification is not Classification.DECAYING:
                continue
            verdict = theorem_check(result.solution)
            assert verdict.theorem_holds, verdict.to_json()
            if verdict.assumption_ok:
                assert verdict.l2_finite, verdict.to_json()
                assert verdict.dichotomy != "upper", verdict.to_json()
                assert abs(verdict.tau_inf) >= 0.98 * verdict.tau_threshold, verdict.to_json()
                assert verdict.functional_ok, verdict.to_json()
            if c == 1 and k > 0:
                assert verdict.dichotomy == "lower", verdict.to_json()
                assert verdict.functional_ok, verdict.to_json()
            checked += 1
    assert checked > 0


def test_norms_scale_with_solution(benchmark_shot):
    p = float(p_n(7))
    scaled = shoot(BENCHMARK, MU * 2.0 ** (2 - p), (1.0, 4.0))
    base, doubled = norms(benchmark_shot.solution), norms(scaled.solution)
    assert doubled.l2 == pytest.approx(4 * base.l2, rel=1e-4)
    assert doubled.lpn == pytest.approx(2**p * base.lpn, rel=1e-4)


def test_drift_near_center():
    drift, _ = radial_coefficients(BENCHMARK, 1e-3)
    assert drift == pytest.approx(2 / 1e-3 + (2 / 3) * 1e-3, rel=1e-12)
