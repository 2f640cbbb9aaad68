"""Expression grammar: parsing, printing, log-polar evaluation, derivatives.

The differentiation oracle is a central finite difference through the
plain-complex compiled closure, so the symbolic derivative is checked
against something that never looks at the tree structure.
"""

import cmath
import math
import random

import pytest
from hypothesis import given, strategies as st

from ode_growth_lab.expressions import (
    DeclaredProps,
    EquationSpec,
    ExpressionSyntaxError,
    InvalidEquationError,
    LogPolarValue,
    PolyLeaf,
    Polynomial,
    compile_complex,
    differentiate,
    evaluate,
    exp_of,
    logpolar_sum,
    parse_expression,
    poly,
    product,
    scale,
    split_exp_factor,
    summation,
    symbolic_order,
)

P = parse_expression


# ---------------------------------------------------------------------------
# strategies

_small = st.integers(-3, 3)


@st.composite
def _poly_leaves(draw, max_deg=3):
    deg = draw(st.integers(0, max_deg))
    coeffs = [complex(draw(_small), draw(_small)) for _ in range(deg + 1)]
    return poly(*coeffs)


@st.composite
def _exp_terms(draw):
    # nonconstant exponent, else the factor folds to a scalar
    deg = draw(st.integers(1, 3))
    coeffs = [complex(draw(_small), draw(_small)) for _ in range(deg)]
    lead = draw(st.sampled_from([1, -1, 2, 1j, -2j]))
    factor = draw(_poly_leaves(max_deg=2))
    return product([factor, exp_of(poly(*coeffs, lead))])


@st.composite
def _coeff_exprs(draw):
    parts = draw(
        st.lists(st.one_of(_poly_leaves(), _exp_terms()), min_size=1, max_size=3)
    )
    combined = summation(parts)
    if draw(st.booleans()):
        combined = product([combined, draw(_poly_leaves(max_deg=2))])
    return combined


_points = st.builds(
    complex,
    st.floats(-2, 2, allow_nan=False),
    st.floats(-2, 2, allow_nan=False),
)


# ---------------------------------------------------------------------------
# parse / print

CANONICAL = [
    "0",
    "1",
    "1i",
    "-z",
    "1 + 2*z",
    "z^5",
    "exp(z)",
    "-exp(z)",
    "z^2*exp(z) + 1",
    "2*z*exp(z^2)",
    "exp(z^2) + 1",
    "(exp(z^2) + 1)*exp(z)",
    "(1 - z)*exp(-z) + 1",
]


@pytest.mark.parametrize("text", CANONICAL)
def test_canonical_strings_survive_round_trip(text):
    assert str(P(text)) == text


@pytest.mark.parametrize(
    "text, canonical",
    [
        ("2*z + 3*z", "5*z"),
        ("exp(0)", "1"),
        ("z*z*z", "z^3"),
        ("(1 + z)*(1 - z)", "1 - z^2"),
        ("exp(z)*exp(z)", "exp(2*z)"),
        ("0*exp(z^2)", "0"),
        ("z^2 - z^2", "0"),
        ("+z", "z"),
    ],
)
def test_canonicalization(text, canonical):
    assert str(P(text)) == canonical


@given(_coeff_exprs())
def test_print_parse_round_trip(expr):
    assert P(str(expr)) == expr


@pytest.mark.parametrize(
    "bad",
    ["", "sin(z)", "z**2", "1/z", "exp(z", "z^", "z^-1", "exp(exp(z))", "2 2",
     "w + 1", "exp()"],
)
def test_rejected_inputs(bad):
    with pytest.raises(ExpressionSyntaxError):
        P(bad)


# ---------------------------------------------------------------------------
# evaluation

@given(_coeff_exprs(), _points)
def test_logpolar_evaluation_matches_compiled(expr, z):
    direct = compile_complex(expr)(z)
    lp = evaluate(expr, z)
    if lp.is_zero:
        assert abs(direct) < 1e-9
        return
    got = lp.to_complex()
    assert cmath.isclose(got, direct, rel_tol=1e-9, abs_tol=1e-9)


def test_logpolar_handles_magnitudes_past_double_range():
    v = evaluate(P("exp(z^2)"), complex(50.0, 0.0))
    assert v.log_magnitude == pytest.approx(2500.0)
    assert v.phase == pytest.approx(0.0)
    w = evaluate(P("exp(z^2)"), complex(0.0, 50.0))
    assert w.log_magnitude == pytest.approx(-2500.0)


def test_logpolar_sum_cancellation():
    # the phase round trip costs a few ulp, so cancellation is deep, not exact
    a = LogPolarValue.from_complex(3 + 4j)
    b = LogPolarValue.from_complex(-3 - 4j)
    s = logpolar_sum([a, b])
    assert s.is_zero or s.log_magnitude < a.log_magnitude - 30


def test_logpolar_zero_encodes_as_is_zero():
    z = LogPolarValue.from_complex(0j)
    assert z.is_zero
    assert logpolar_sum([z, z]).is_zero


def test_logpolar_sum_of_distant_scales_keeps_the_big_term():
    big = evaluate(P("exp(z)"), complex(800.0, 0.0))
    small = LogPolarValue.from_complex(1.0)
    s = logpolar_sum([big, small])
    assert s.log_magnitude == pytest.approx(800.0)


# ---------------------------------------------------------------------------
# differentiation

def _fd_derivative(fun, z, h=1e-5):
    return (fun(z + h) - fun(z - h)) / (2 * h)


FD_CASES = [
    "z^5",
    "exp(z)",
    "z*exp(z)",
    "exp(z^2)",
    "(exp(z^2) + 1)*exp(z)",
    "(1 - z)*exp(-z) + 1",
    "z^3*exp(2*z) + z - 4",
]


@pytest.mark.parametrize("text", FD_CASES)
def test_derivative_matches_finite_differences(text):
    expr = P(text)
    d = compile_complex(differentiate(expr))
    f = compile_complex(expr)
    rng = random.Random(1207)
    for _ in range(20):
        z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        want = _fd_derivative(f, z)
        got = d(z)
        assert cmath.isclose(got, want, rel_tol=5e-6, abs_tol=1e-6)


@pytest.mark.parametrize(
    "text, derivative",
    [
        ("z*exp(z)", "exp(z) + z*exp(z)"),
        ("exp(z^2)", "2*z*exp(z^2)"),
        ("z^4", "4*z^3"),
        ("7", "0"),
    ],
)
def test_derivative_printed_forms(text, derivative):
    assert str(differentiate(P(text))) == derivative


@given(_coeff_exprs(), _coeff_exprs())
def test_differentiation_is_linear_structurally(f, g):
    lhs = differentiate(summation([f, g]))
    rhs = summation([differentiate(f), differentiate(g)])
    assert lhs == rhs


@given(_coeff_exprs())
def test_class_closed_under_differentiation(expr):
    # the derivative must re-parse to itself, i.e. stay inside the grammar
    d = differentiate(expr)
    assert P(str(d)) == d


# ---------------------------------------------------------------------------
# order and structural split

@pytest.mark.parametrize(
    "text, order",
    [
        ("z^5", 0.0),
        ("0", 0.0),
        ("exp(z)", 1.0),
        ("exp(z^2) + z^9", 2.0),
        ("z^2*exp(z^3)", 3.0),
        ("(exp(z^2) + 1)*exp(z)", 2.0),
    ],
)
def test_symbolic_order(text, order):
    assert symbolic_order(P(text)) == order


def test_split_exp_factor_plain():
    h, p = split_exp_factor(P("exp(z^2)"))
    assert str(h) == "1"
    assert p.degree == 2
    assert p.coeffs == (0j, 0j, 1 + 0j)


def test_split_exp_factor_with_entire_cofactor():
    h, p = split_exp_factor(P("(exp(z^2) + 1)*exp(z)"))
    assert str(h) == "exp(z^2) + 1"
    assert p.degree == 1


def test_split_exp_factor_none_for_polynomials():
    assert split_exp_factor(P("z^3")) is None
    assert split_exp_factor(P("0")) is None


@given(_poly_leaves(max_deg=2), st.integers(1, 3))
def test_split_inverts_construction(factor, deg):
    p = Polynomial.monomial(deg, 1.0)
    expr = product([factor, exp_of(PolyLeaf(p))])
    got = split_exp_factor(expr)
    if factor.poly.is_zero:
        assert got is None or str(expr) == "0"
        return
    h, q = got
    assert q == p
    assert h == factor


# ---------------------------------------------------------------------------
# equation specs

def test_zero_b_is_rejected():
    with pytest.raises(InvalidEquationError):
        EquationSpec("bad", P("z"), P("0"))


def test_structurally_zero_forcing_collapses_to_homogeneous():
    spec = EquationSpec("h", P("z"), P("exp(z)"), H=P("z - z"))
    assert spec.H is None
    assert spec.homogeneous


def test_declared_mu_b_cannot_exceed_order_of_b():
    with pytest.raises(InvalidEquationError):
        EquationSpec(
            "bad", P("z"), P("exp(z)"), declared=DeclaredProps(mu_B=2.0)
        )


def test_homogeneous_part_strips_forcing_only():
    spec = EquationSpec("e", P("z"), P("exp(z)"), H=P("1"))
    reduced = spec.homogeneous_part()
    assert reduced.H is None
    assert reduced.A == spec.A and reduced.B == spec.B
    assert spec.H is not None


def test_scale_produces_polynomial_factor():
    expr = scale(-0.5, differentiate(P("exp(z)")))
    assert str(expr) == "-0.5*exp(z)"
