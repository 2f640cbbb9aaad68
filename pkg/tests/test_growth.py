"""Growth metrics against closed forms: orders, proximity, modulus profiles.

Every estimator here has an exact target: log M(r, e^z) = r, log M(r,
e^{z^2}) = r^2, m(r, e^z) = r/pi, min |e^z| on a circle = e^{-r}.  The
estimators only see point evaluations, so agreement is a real check.
"""

import cmath
import math

import pytest

from ode_growth_lab.expressions import evaluate, parse_expression
from ode_growth_lab.growth import (
    ConvergenceError,
    GrowthProfile,
    ProfileEntry,
    ProfileError,
    compare_growth,
    fit_loglog_slope,
    hyper_order_estimate,
    log_derivative_profile,
    max_modulus_profile,
    min_modulus_profile,
    nevanlinna_m,
    order_estimate,
)
from ode_growth_lab.ray_engine import integrate_ray
from ode_growth_lab.expressions import EquationSpec

P = parse_expression

WIDE_RADII = [5.0 * 100.0 ** (k / 9) for k in range(10)]   # 5 .. 500


def _ev(text):
    expr = P(text)
    return lambda z: evaluate(expr, z)


# ---------------------------------------------------------------------------
# modulus profiles

def test_max_modulus_of_exp_is_r():
    profile = max_modulus_profile(_ev("exp(z)"), [3.0, 10.0, 40.0])
    for e in profile.entries:
        assert e.log_max_modulus == pytest.approx(e.r, abs=1e-6)
        assert min(e.argmax_theta, 2 * math.pi - e.argmax_theta) < 1e-2


def test_golden_refinement_beats_the_bare_grid():
    # rotate so the growth direction falls between grid nodes
    c = cmath.exp(0.31j)
    f = lambda z: evaluate(P("exp(z)"), c * z)
    r = 25.0
    profile = max_modulus_profile(f, [r], angular_samples=64)
    grid_best = max(
        evaluate(P("exp(z)"), c * r * cmath.exp(2j * math.pi * k / 64)).log_magnitude
        for k in range(64)
    )
    got = profile.entries[0].log_max_modulus
    assert got >= grid_best - 1e-12
    assert got == pytest.approx(r, abs=1e-3)


def test_min_modulus_closed_forms():
    profile = min_modulus_profile(_ev("exp(z)"), [3.0, 7.0])
    assert [e.log_min_modulus for e in profile.entries] == pytest.approx(
        [-3.0, -7.0], abs=1e-6
    )
    poly = min_modulus_profile(_ev("z^5"), [2.0, 10.0])
    assert [e.log_min_modulus for e in poly.entries] == pytest.approx(
        [5 * math.log(2), 5 * math.log(10)], abs=1e-9
    )


def test_min_modulus_matches_dense_grid():
    f = _ev("(1 - z)*exp(-z) + 1")
    r = 2.5
    profile = min_modulus_profile(f, [r])
    brute = min(
        f(r * cmath.exp(2j * math.pi * k / 65536)).log_magnitude
        for k in range(65536)
    )
    assert profile.entries[0].log_min_modulus <= brute + 1e-6


# ---------------------------------------------------------------------------
# order estimation

@pytest.mark.parametrize(
    "text, order, tol",
    [("exp(z)", 1.0, 0.05), ("exp(z^2)", 2.0, 0.1)],
)
def test_order_estimates(text, order, tol):
    est = order_estimate(max_modulus_profile(_ev(text), WIDE_RADII))
    assert est.value == pytest.approx(order, abs=tol)
    assert est.kind == "order"


def test_polynomial_order_is_zero_with_a_note():
    est = order_estimate(max_modulus_profile(_ev("z^5"), WIDE_RADII))
    assert est.value == 0.0
    assert "polynomial" in est.note


def test_slowly_converging_order():
    # z e^z: log M = r + log r, slope approaches 1 only for large r
    radii = [10.0 * 100.0 ** (k / 9) for k in range(10)]
    est = order_estimate(max_modulus_profile(_ev("z*exp(z)"), radii))
    assert est.value == pytest.approx(1.0, abs=0.05)


def test_order_estimate_needs_a_wide_window():
    radii = [5.0, 6.0, 7.0, 8.0]
    with pytest.raises(ProfileError):
        order_estimate(max_modulus_profile(_ev("exp(z)"), radii))


def test_hyper_order_of_synthesized_double_exponential():
    entries = tuple(ProfileEntry(r, math.exp(r), 0.0, 0.0) for r in WIDE_RADII)
    est = hyper_order_estimate(GrowthProfile(entries))
    assert est.value == pytest.approx(1.0, abs=0.05)
    assert est.kind == "hyper_order"


def test_hyper_order_of_finite_order_profile_is_small():
    est = hyper_order_estimate(max_modulus_profile(_ev("z^5"), WIDE_RADII))
    assert 0.0 <= est.value < 0.2


def test_fit_loglog_slope_recovers_exact_power_law():
    radii = [2.0, 4.0, 9.0, 20.0, 50.0]
    values = [3.7 * r**1.5 for r in radii]
    slope, residual = fit_loglog_slope(radii, values)
    assert slope == pytest.approx(1.5, abs=1e-12)
    assert residual < 1e-12


# ---------------------------------------------------------------------------
# proximity function

@pytest.mark.parametrize("r", [10.0, 50.0])
def test_nevanlinna_m_of_exp(r):
    got = nevanlinna_m(_ev("exp(z)"), r)
    assert got == pytest.approx(r / math.pi, rel=0.01)


def test_nevanlinna_m_of_bounded_function_vanishes():
    assert nevanlinna_m(_ev("0.5"), 10.0) == 0.0


def test_nevanlinna_convergence_error():
    with pytest.raises(ConvergenceError):
        nevanlinna_m(_ev("exp(z)"), 10.0, tol=1e-14, max_refinements=1)


def test_nevanlinna_rejects_bad_arguments():
    with pytest.raises(ValueError):
        nevanlinna_m(_ev("exp(z)"), -1.0)


# ---------------------------------------------------------------------------
# logarithmic derivative and comparison

def test_log_derivative_of_circular_solution():
    # f'' + f = 0 with f(0) = 0, f'(0) = 1 is sin; f'/f = cot
    spec = EquationSpec("osc", P("0"), P("1"))
    cps = [0.4, 0.9, 1.3, 2.2, 2.8]
    samples = integrate_ray(spec, 0.0, 0.0, 3.0, init=(0, 1), checkpoints=cps)
    wanted = {t: math.log(abs(math.cos(t) / math.sin(t))) for t in cps}
    with pytest.warns(UserWarning):    # f(0) = 0 is skipped, by design
        got = dict(log_derivative_profile(samples))
    for t in cps:
        assert got[t] == pytest.approx(wanted[t], abs=1e-8)


def test_log_derivative_skips_zeros_of_f():
    spec = EquationSpec("osc", P("0"), P("1"))
    samples = integrate_ray(spec, 0.0, 0.0, 1.0, init=(0, 1))
    with pytest.warns(UserWarning):
        pairs = log_derivative_profile(samples)
    assert all(math.isfinite(v) for _, v in pairs)
    assert len(pairs) == len(samples) - 1   # only t = 0 has f = 0


def test_compare_growth_closed_form():
    diffs = compare_growth(_ev("exp(z^2)"), _ev("exp(z)"), [2.0, 5.0, 10.0])
    want = {2.0: 2.0, 5.0: 20.0, 10.0: 90.0}
    for r, d in diffs:
        assert d == pytest.approx(want[r], abs=1e-6)
