"""Rule-based growth classification for f'' + A f' + B f = H.

Each rule encodes a published sufficient condition under which every
non-trivial solution has infinite order (some with a pinned hyper-order).
A rule fires only when every hypothesis is decidable and satisfied; nothing
is ever guessed.  Hypotheses that rest on user declarations (Fabry gaps,
Fatou components, zero distribution, mu(B)) are marked as declared in the
verdict trace.

The expression grammar makes most hypotheses decidable outright: orders are
exact, "polynomial" and "transcendental" are structural, and A = h * e^p is
read off the canonical product form.  Two rules can never fire on grammar
input: H1991b needs 0 < rho(A) <= 1/2 and G1988c needs a transcendental A of
order zero, but grammar orders are either 0 (polynomials) or a positive
integer.  They are still evaluated honestly and their traces show which
hypothesis failed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .expressions import (
    CoeffExpr,
    EquationSpec,
    Polynomial,
    is_polynomial,
    split_exp_factor,
    symbolic_order,
)

__all__ = [
    "RuleId",
    "LongCase",
    "Conclusion",
    "HypothesisCheck",
    "Verdict",
    "EquationFeatures",
    "extract_features",
    "evaluate_rules",
    "finalize_verdicts",
    "classify",
    "check_zhang",
    "check_long",
    "hyper_order_claim",
]


class RuleId(enum.Enum):
    G1988a = "G1988a"
    H1991b = "H1991b"
    G1988c = "G1988c"
    G1988d = "G1988d"
    Zhang_hE_P = "Zhang_hE_P"
    Long2018a = "Long2018a"
    Long2018b = "Long2018b"
    Long2018c = "Long2018c"
    KumarSaini_Fabry = "KumarSaini_Fabry"
    Fatou_MC_homog = "Fatou_MC_homog"
    Manisha_poly = "Manisha_poly"
    Th2_i = "Th2_i"
    Th2_ii = "Th2_ii"
    KumarSaini_Fabry_nonhomog = "KumarSaini_Fabry_nonhomog"
    Fatou_MC_nonhomog = "Fatou_MC_nonhomog"


_NONHOMOG_RULES = {RuleId.KumarSaini_Fabry_nonhomog, RuleId.Fatou_MC_nonhomog}


class Conclusion(enum.Enum):
    ALL_INFINITE = "AllSolutionsInfiniteOrder"
    ALL_INFINITE_HYPER = "AllSolutionsInfiniteOrderWithHyperOrder"
    NO_RULE = "NoRuleApplies"
    AT_MOST_ONE_EXCEPTIONAL = "AtMostOneExceptionalSolution"


class LongCase(enum.Enum):
    CASE_A = "case_a"
    CASE_B = "case_b"
    CASE_C = "case_c"
    NONE = "none"


@dataclass(frozen=True)
class HypothesisCheck:
    name: str
    value: str
    satisfied: bool
    declared: bool = False


@dataclass(frozen=True)
class Verdict:
    rule: RuleId | None
    conclusion: Conclusion
    hypotheses_checked: tuple[HypothesisCheck, ...]
    citation: str
    hyper_order: float | None = None

    @property
    def fired(self) -> bool:
        return all(h.satisfied for h in self.hypotheses_checked)

    def key(self) -> str:
        """Stable identifier used by scenario expectations and reports."""
        return self.rule.value if self.rule is not None else self.conclusion.value


# ---------------------------------------------------------------------------
# arithmetic checks shared with the catalog


def check_zhang(n: int, m: int) -> bool:
    """m + 2 > 2n together with n not dividing m + 2 (deg p = n, deg B = m)."""
    if n < 2:
        raise ValueError(f"check_zhang requires n >= 2, got {n}")
    if m < 1:
        raise ValueError(f"check_zhang requires m >= 1, got {m}")
    return m + 2 > 2 * n and (m + 2) % n != 0


def check_long(n: int, m: int, a_n: complex, b_m: complex) -> LongCase:
    """Which of the three degree/resonance cases applies, if any.

    n = deg p for A = h e^p with leading coefficient a_n of p; m = deg B with
    leading coefficient b_m.  case_c additionally requires a_n^2 / b_m to not
    be a negative real number.
    """
    if n < 1:
        raise ValueError(f"check_long requires n >= 1, got {n}")
    if b_m == 0:
        raise ValueError("check_long requires b_m != 0")
    s = m + 2
    if s < 2 * n:
        return LongCase.CASE_A
    if s > 2 * n:
        if s % (2 * n) != 0:
            return LongCase.CASE_B
        return LongCase.NONE
    q = a_n * a_n / b_m
    if q.imag != 0 or q.real >= 0:
        return LongCase.CASE_C
    return LongCase.NONE


# ---------------------------------------------------------------------------
# feature extraction


@dataclass(frozen=True)
class ExpFactorFeatures:
    """Structural A = h * e^p data."""

    h: CoeffExpr
    p: Polynomial
    n: int
    p_leading: complex
    h_order: float
    h_is_polynomial: bool


@dataclass(frozen=True)
class EquationFeatures:
    """Everything the rules look at; None means unknown, never assumed.

    entire is False only for degraded inputs built outside the grammar
    (the catalog's meromorphic example); every rule requires it.
    """

    rho_A: float | None = None
    rho_B: float | None = None
    rho_H: float | None = None
    A_is_polynomial: bool | None = None
    B_is_polynomial: bool | None = None
    B_degree: int | None = None
    B_leading: complex | None = None
    exp_factor: ExpFactorFeatures | None = None
    nonhomogeneous: bool = False
    entire: bool = True
    fabry_gaps: bool = False
    multiply_connected_fatou: bool = False
    lambda_lt_rho: bool = False
    h_bounded_flag: bool = False
    mu_B: float | None = None


def extract_features(spec: EquationSpec) -> EquationFeatures:
    A, B, H = spec.A, spec.B, spec.H
    ef = None
    sp = split_exp_factor(A)
    if sp is not None:
        h, p = sp
        ef = ExpFactorFeatures(
            h=h,
            p=p,
            n=p.degree,
            p_leading=p.leading,
            h_order=symbolic_order(h),
            h_is_polynomial=is_polynomial(h),
        )
    b_poly = is_polynomial(B)
    return EquationFeatures(
        rho_A=symbolic_order(A),
        rho_B=symbolic_order(B),
        rho_H=None if H is None else symbolic_order(H),
        A_is_polynomial=is_polynomial(A),
        B_is_polynomial=b_poly,
        B_degree=B.poly.degree if b_poly else None,
        B_leading=B.poly.leading if b_poly else None,
        exp_factor=ef,
        nonhomogeneous=H is not None,
        fabry_gaps=spec.declared.fabry_gaps,
        multiply_connected_fatou=spec.declared.multiply_connected_fatou,
        lambda_lt_rho=spec.declared.lambda_lt_rho,
        h_bounded_flag=spec.declared.h_bounded_away_on_Eplus_blows_up_on_Eminus,
        mu_B=spec.declared.mu_B,
    )


# ---------------------------------------------------------------------------
# hypothesis builders


def _fmt(x) -> str:
    if x is None:
        return "unknown"
    if isinstance(x, float) and x == int(x):
        return str(int(x))
    return str(x)


def _entire(f: EquationFeatures) -> HypothesisCheck:
    return HypothesisCheck(
        "coefficients entire",
        "grammar expressions are entire" if f.entire else "not entire",
        f.entire,
    )


def _known_lt(name: str, a: float | None, b: float | None, declared=False) -> HypothesisCheck:
    ok = a is not None and b is not None and a < b
    return HypothesisCheck(name, f"{_fmt(a)} vs {_fmt(b)}", ok, declared)


def _transcendental_A(f: EquationFeatures) -> HypothesisCheck:
    ok = f.A_is_polynomial is False
    return HypothesisCheck(
        "A transcendental",
        "yes" if ok else ("polynomial" if f.A_is_polynomial else "unknown"),
        ok,
    )


def _struct_split(f: EquationFeatures) -> HypothesisCheck:
    ok = f.exp_factor is not None
    val = (
        f"h = {f.exp_factor.h}, deg p = {f.exp_factor.n}"
        if ok
        else "no structural h*e^p factorization"
    )
    return HypothesisCheck("A = h*e^p structurally", val, ok)


def _lambda_lt_rho(f: EquationFeatures) -> HypothesisCheck:
    """lambda(A) < rho(A): auto for polynomial h (finitely many zeros)."""
    ef = f.exp_factor
    if ef is not None and ef.h_is_polynomial:
        return HypothesisCheck(
            "lambda(A) < rho(A)", "h polynomial, finitely many zeros", True
        )
    return HypothesisCheck(
        "lambda(A) < rho(A)",
        "declared" if f.lambda_lt_rho else "not derivable, not declared",
        f.lambda_lt_rho,
        declared=True,
    )


def _b_polynomial(f: EquationFeatures, nonconstant=False) -> list[HypothesisCheck]:
    ok = f.B_is_polynomial is True
    out = [
        HypothesisCheck(
            "B polynomial",
            f"deg B = {_fmt(f.B_degree)}" if ok else "not a polynomial",
            ok,
        )
    ]
    if nonconstant:
        nc = ok and f.B_degree is not None and f.B_degree >= 1
        out.append(HypothesisCheck("B nonconstant", f"deg B = {_fmt(f.B_degree)}", nc))
    return out


def _b_transcendental(f: EquationFeatures) -> HypothesisCheck:
    ok = f.B_is_polynomial is False
    return HypothesisCheck(
        "B transcendental",
        "yes" if ok else ("polynomial" if f.B_is_polynomial else "unknown"),
        ok,
    )


def _manisha_A(f: EquationFeatures) -> list[HypothesisCheck]:
    """The A-side hypotheses shared by Manisha_poly, Th2_i and Th2_ii."""
    out = [_struct_split(f)]
    ef = f.exp_factor
    if ef is not None:
        out.append(
            HypothesisCheck(
                "rho(h) > deg p",
                f"rho(h) = {_fmt(ef.h_order)}, deg p = {ef.n}",
                ef.h_order > ef.n,
            )
        )
    else:
        out.append(HypothesisCheck("rho(h) > deg p", "no h*e^p split", False))
    out.append(
        HypothesisCheck(
            "h bounded away from 0 on E+, exponential blow-up on E-",
            "declared" if f.h_bounded_flag else "not declared",
            f.h_bounded_flag,
            declared=True,
        )
    )
    return out


# ---------------------------------------------------------------------------
# the rules


def _rule_g1988a(f: EquationFeatures) -> Verdict:
    hyps = (_entire(f), _known_lt("rho(A) < rho(B)", f.rho_A, f.rho_B))
    return Verdict(
        RuleId.G1988a,
        Conclusion.ALL_INFINITE,
        hyps,
        "Gundersen 1988: rho(A) < rho(B) forces every non-trivial solution "
        "of f'' + A f' + B f = 0 to have infinite order.",
    )


def _rule_h1991b(f: EquationFeatures) -> Verdict:
    half = f.rho_A is not None and 0 < f.rho_A <= 0.5
    hyps = (
        _entire(f),
        _known_lt("rho(B) < rho(A)", f.rho_B, f.rho_A),
        HypothesisCheck("0 < rho(A) <= 1/2", f"rho(A) = {_fmt(f.rho_A)}", half),
    )
    return Verdict(
        RuleId.H1991b,
        Conclusion.ALL_INFINITE,
        hyps,
        "Hellerstein, Miles and Rossi 1991: rho(B) < rho(A) <= 1/2 forces "
        "infinite order.  (No grammar expression has order in (0, 1/2]; this "
        "rule cannot fire on grammar input.)",
    )


def _rule_g1988c(f: EquationFeatures) -> Verdict:
    zero_order = f.rho_A == 0.0
    hyps = (
        _entire(f),
        _transcendental_A(f),
        HypothesisCheck(
            "rho(A) = 0", f"rho(A) = {_fmt(f.rho_A)}", zero_order
        ),
        *_b_polynomial(f),
    )
    return Verdict(
        RuleId.G1988c,
        Conclusion.ALL_INFINITE,
        hyps,
        "Gundersen 1988: A transcendental of order zero with polynomial B "
        "forces infinite order.  (Grammar expressions of order zero are "
        "polynomials; this rule cannot fire on grammar input.)",
    )


def _rule_g1988d(f: EquationFeatures) -> Verdict:
    hyps = (
        _entire(f),
        HypothesisCheck(
            "A polynomial",
            "yes" if f.A_is_polynomial else "not a polynomial",
            f.A_is_polynomial is True,
        ),
        _b_transcendental(f),
    )
    return Verdict(
        RuleId.G1988d,
        Conclusion.ALL_INFINITE,
        hyps,
        "Gundersen 1988: polynomial A with transcendental B forces infinite order.",
    )


def _rule_zhang(f: EquationFeatures) -> Verdict:
    hyps = [_entire(f), _struct_split(f)]
    ef = f.exp_factor
    if ef is not None:
        hyps.append(
            HypothesisCheck(
                "rho(h) < n", f"rho(h) = {_fmt(ef.h_order)}, n = {ef.n}", ef.h_order < ef.n
            )
        )
        hyps.append(HypothesisCheck("n >= 2", f"n = {ef.n}", ef.n >= 2))
    hyps.extend(_b_polynomial(f, nonconstant=True))
    if ef is not None and ef.n >= 2 and f.B_is_polynomial and (f.B_degree or 0) >= 1:
        ok = check_zhang(ef.n, f.B_degree)
        hyps.append(
            HypothesisCheck(
                "m+2 > 2n and n does not divide m+2",
                f"m+2 = {f.B_degree + 2}, 2n = {2 * ef.n}",
                ok,
            )
        )
    else:
        hyps.append(
            HypothesisCheck(
                "m+2 > 2n and n does not divide m+2", "prerequisites missing", False
            )
        )
    return Verdict(
        RuleId.Zhang_hE_P,
        Conclusion.ALL_INFINITE,
        tuple(hyps),
        "Zhang 2018 degree condition, extended to A = h e^p with rho(h) < n: "
        "deg p = n >= 2, B a nonconstant polynomial of degree m with "
        "m+2 > 2n and n not dividing m+2 forces infinite order.",
    )


_LONG_CITATIONS = {
    RuleId.Long2018a: (
        LongCase.CASE_A,
        "Long 2018, case (a): m+2 < 2n.",
    ),
    RuleId.Long2018b: (
        LongCase.CASE_B,
        "Long 2018, case (b): m+2 > 2n and m+2 is not a multiple of 2n.",
    ),
    RuleId.Long2018c: (
        LongCase.CASE_C,
        "Long 2018, case (c): m+2 = 2n and a_n^2/b_m is not real negative.",
    ),
}


def _rule_long(f: EquationFeatures, rule: RuleId) -> Verdict:
    want_case, case_text = _LONG_CITATIONS[rule]
    hyps = [_entire(f), _struct_split(f), _lambda_lt_rho(f)]
    hyps.extend(_b_polynomial(f))
    ef = f.exp_factor
    if ef is not None and f.B_is_polynomial and f.B_leading is not None:
        got = check_long(ef.n, f.B_degree, ef.p_leading, f.B_leading)
        hyps.append(
            HypothesisCheck(
                f"degree case {want_case.value}",
                f"n = {ef.n}, m = {f.B_degree}, matched {got.value}",
                got is want_case,
            )
        )
    else:
        hyps.append(
            HypothesisCheck(
                f"degree case {want_case.value}", "prerequisites missing", False
            )
        )
    return Verdict(
        rule,
        Conclusion.ALL_INFINITE,
        tuple(hyps),
        "Long 2018: A = h e^p with lambda(A) < rho(A) and polynomial B "
        "forces infinite order in the matched degree case.  " + case_text,
    )


def _rule_fabry(f: EquationFeatures) -> Verdict:
    hyps = (
        _entire(f),
        _transcendental_A(f),
        HypothesisCheck(
            "A has Fabry gaps",
            "declared" if f.fabry_gaps else "not declared",
            f.fabry_gaps,
            declared=True,
        ),
        _known_lt("rho(B) < rho(A)", f.rho_B, f.rho_A),
    )
    return Verdict(
        RuleId.KumarSaini_Fabry,
        Conclusion.ALL_INFINITE_HYPER,
        hyps,
        "Kumar and Saini 2021: A with Fabry gaps and rho(B) < rho(A) forces "
        "infinite order with hyper-order equal to rho(A).",
        hyper_order=f.rho_A,
    )


def _rule_fatou(f: EquationFeatures) -> Verdict:
    hyps = (
        _entire(f),
        _transcendental_A(f),
        HypothesisCheck(
            "A has a multiply-connected Fatou component",
            "declared" if f.multiply_connected_fatou else "not declared",
            f.multiply_connected_fatou,
            declared=True,
        ),
        _known_lt("rho(B) < rho(A)", f.rho_B, f.rho_A),
    )
    return Verdict(
        RuleId.Fatou_MC_homog,
        Conclusion.ALL_INFINITE_HYPER,
        hyps,
        "A admitting a multiply-connected Fatou component with rho(B) < rho(A) "
        "forces infinite order with hyper-order equal to rho(A).",
        hyper_order=f.rho_A,
    )


def _rule_manisha(f: EquationFeatures) -> Verdict:
    hyps = (_entire(f), *_manisha_A(f), *_b_polynomial(f))
    return Verdict(
        RuleId.Manisha_poly,
        Conclusion.ALL_INFINITE,
        hyps,
        "A = h e^p with rho(h) > deg p, h bounded away from zero on the "
        "positive indicator sectors and exponentially blowing up on the "
        "negative ones, with polynomial B, forces infinite order.",
    )


def _rule_th2_i(f: EquationFeatures) -> Verdict:
    hyps = (
        _entire(f),
        *_manisha_A(f),
        _b_transcendental(f),
        _known_lt("rho(B) < rho(A)", f.rho_B, f.rho_A),
    )
    return Verdict(
        RuleId.Th2_i,
        Conclusion.ALL_INFINITE,
        hyps,
        "Transcendental B with rho(B) < rho(A), A as in the bounded/blow-up "
        "hypothesis, forces infinite order.",
    )


def _rule_th2_ii(f: EquationFeatures) -> Verdict:
    mu_ok = f.mu_B is not None and f.rho_A is not None and f.mu_B < f.rho_A
    hyps = (
        _entire(f),
        *_manisha_A(f),
        _b_transcendental(f),
        HypothesisCheck(
            "mu(B) < rho(A)",
            f"mu(B) = {_fmt(f.mu_B)}, rho(A) = {_fmt(f.rho_A)}",
            mu_ok,
            declared=True,
        ),
    )
    return Verdict(
        RuleId.Th2_ii,
        Conclusion.ALL_INFINITE,
        hyps,
        "Transcendental B with lower order mu(B) < rho(A), A as in the "
        "bounded/blow-up hypothesis, forces infinite order.",
    )


def _rule_fabry_nonhomog(f: EquationFeatures) -> Verdict:
    rho_max = _max_known(f.rho_B, f.rho_H)
    hyps = (
        _entire(f),
        HypothesisCheck("H present", "yes" if f.nonhomogeneous else "no", f.nonhomogeneous),
        _transcendental_A(f),
        HypothesisCheck(
            "A has Fabry gaps",
            "declared" if f.fabry_gaps else "not declared",
            f.fabry_gaps,
            declared=True,
        ),
        _known_lt("max(rho(H), rho(B)) < rho(A)", rho_max, f.rho_A),
    )
    return Verdict(
        RuleId.KumarSaini_Fabry_nonhomog,
        Conclusion.ALL_INFINITE,
        hyps,
        "Kumar and Saini 2021, forced equation: A with Fabry gaps and "
        "max(rho(H), rho(B)) < rho(A) forces every solution of "
        "f'' + A f' + B f = H to have infinite order.",
    )


def _rule_fatou_nonhomog(f: EquationFeatures) -> Verdict:
    rho_max = _max_known(f.rho_B, f.rho_H)
    hyps = (
        _entire(f),
        HypothesisCheck("H present", "yes" if f.nonhomogeneous else "no", f.nonhomogeneous),
        _transcendental_A(f),
        HypothesisCheck(
            "A has a multiply-connected Fatou component",
            "declared" if f.multiply_connected_fatou else "not declared",
            f.multiply_connected_fatou,
            declared=True,
        ),
        _known_lt("max(rho(H), rho(B)) < rho(A)", rho_max, f.rho_A),
    )
    return Verdict(
        RuleId.Fatou_MC_nonhomog,
        Conclusion.ALL_INFINITE,
        hyps,
        "A admitting a multiply-connected Fatou component with "
        "max(rho(H), rho(B)) < rho(A) forces every solution of the forced "
        "equation to have infinite order.",
    )


def _max_known(a: float | None, b: float | None) -> float | None:
    known = [x for x in (a, b) if x is not None]
    return max(known) if known else None


_RULE_BUILDERS = {
    RuleId.G1988a: _rule_g1988a,
    RuleId.H1991b: _rule_h1991b,
    RuleId.G1988c: _rule_g1988c,
    RuleId.G1988d: _rule_g1988d,
    RuleId.Zhang_hE_P: _rule_zhang,
    RuleId.Long2018a: lambda f: _rule_long(f, RuleId.Long2018a),
    RuleId.Long2018b: lambda f: _rule_long(f, RuleId.Long2018b),
    RuleId.Long2018c: lambda f: _rule_long(f, RuleId.Long2018c),
    RuleId.KumarSaini_Fabry: _rule_fabry,
    RuleId.Fatou_MC_homog: _rule_fatou,
    RuleId.Manisha_poly: _rule_manisha,
    RuleId.Th2_i: _rule_th2_i,
    RuleId.Th2_ii: _rule_th2_ii,
    RuleId.KumarSaini_Fabry_nonhomog: _rule_fabry_nonhomog,
    RuleId.Fatou_MC_nonhomog: _rule_fatou_nonhomog,
}

_NO_RULE_CITATION = (
    "No implemented sufficient condition applies; solutions may still have "
    "infinite order (the conditions are not necessary)."
)

_AT_MOST_ONE_CITATION = (
    "Laine 1990: when every solution of the reduced homogeneous equation has "
    "infinite order, the forced equation admits at most one solution of "
    "finite order; all others inherit infinite order."
)


def evaluate_rules(features: EquationFeatures, rule_order=None) -> list[Verdict]:
    """Fired verdicts only, reported in RuleId declaration order.

    The homogeneous rules never look at H, so feeding them the full feature
    set is the same as feeding them the reduced equation; the two forced-
    equation rules gate on the "H present" hypothesis.  rule_order exists so
    tests can show the outcome does not depend on evaluation order.
    """
    order = list(rule_order) if rule_order is not None else list(RuleId)
    fired = {}
    for rid in order:
        v = _RULE_BUILDERS[rid](features)
        if v.fired:
            fired[rid] = v
    return [fired[rid] for rid in RuleId if rid in fired]


def finalize_verdicts(fired: list[Verdict], nonhomogeneous: bool) -> list[Verdict]:
    """Append the fallback verdicts a caller-facing classification carries."""
    verdicts = list(fired)
    if (
        nonhomogeneous
        and verdicts
        and not any(v.rule in _NONHOMOG_RULES for v in verdicts)
    ):
        verdicts.append(
            Verdict(
                None,
                Conclusion.AT_MOST_ONE_EXCEPTIONAL,
                (
                    HypothesisCheck(
                        "homogeneous rules fired on the reduced equation",
                        ", ".join(v.rule.value for v in verdicts if v.rule),
                        True,
                    ),
                ),
                _AT_MOST_ONE_CITATION,
            )
        )
    if not verdicts:
        return [Verdict(None, Conclusion.NO_RULE, (), _NO_RULE_CITATION)]
    return verdicts


def classify(spec: EquationSpec) -> list[Verdict]:
    """Classify an equation spec.

    Deterministic, and monotone in the declared flags: setting a flag can only
    add verdicts, never remove one.
    """
    features = extract_features(spec)
    return finalize_verdicts(evaluate_rules(features), features.nonhomogeneous)


def hyper_order_claim(spec: EquationSpec) -> float | None:
    """rho(A) when a hyper-order pinning rule fired, else None."""
    for v in classify(spec):
        if v.conclusion is Conclusion.ALL_INFINITE_HYPER and v.fired:
            return v.hyper_order
    return None
