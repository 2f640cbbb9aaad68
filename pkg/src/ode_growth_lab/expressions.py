"""Closed expression grammar for ODE coefficients, and log-polar evaluation.

The coefficient language is deliberately tiny::

    expr   := ("+" | "-")? term (("+" | "-") term)*
    term   := factor ("*" factor)*
    factor := NUMBER | NUMBER "i" | "i" | "z" ("^" UINT)?
            | "exp" "(" expr ")" | "(" expr ")"

where every exp() argument must reduce to a polynomial.  Everything the
grammar can denote is an entire function of finite order, and the class is
closed under differentiation, which is what the rest of the package leans on.

Trees are canonicalized on construction:

* purely polynomial subtrees collapse into a single PolyLeaf,
* products carry at most one polynomial factor (first) and at most one
  exp factor (last), with any remaining factors (sums such as e^{z^2}+1)
  kept structurally intact,
* exp of a constant folds into a scalar, and scalar multiples become a
  degree-0 polynomial factor.

Canonical form is what makes the structural h*e^P split used by the
classifier well defined, and it gives the print -> parse round trip.

Values are carried in log-polar form (log-magnitude, phase) so that
quantities like e^{z^2} at |z| = 50 (log-magnitude 2500) stay representable.
A log-magnitude of -inf encodes an exact zero.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass, field, replace

__all__ = [
    "Polynomial",
    "LogPolarValue",
    "logpolar_sum",
    "CoeffExpr",
    "PolyLeaf",
    "ExpPoly",
    "Sum",
    "Product",
    "poly",
    "const",
    "Z",
    "exp_of",
    "summation",
    "product",
    "scale",
    "parse_expression",
    "evaluate",
    "differentiate",
    "symbolic_order",
    "split_exp_factor",
    "compile_complex",
    "DeclaredProps",
    "EquationSpec",
    "ExpressionError",
    "ExpressionSyntaxError",
    "InvalidEquationError",
]

_TWO_PI = 2.0 * math.pi


class ExpressionError(ValueError):
    """Invalid expression construction (bad exp argument, non-finite coefficient)."""


class ExpressionSyntaxError(ExpressionError):
    """Parse failure; carries the character offset of the offending token."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class InvalidEquationError(ValueError):
    """Equation spec violates a structural requirement (e.g. B identically zero)."""


def _require_finite(c: complex, what: str) -> complex:
    c = complex(c)
    if not (math.isfinite(c.real) and math.isfinite(c.imag)):
        raise ExpressionError(f"{what} must be finite, got {c!r}")
    return c


# ---------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class Polynomial:
    """Dense polynomial over C, coefficients lowest-degree first.

    Trailing zero coefficients are stripped on construction, so the leading
    coefficient is nonzero except for the zero polynomial, whose coeffs tuple
    is empty and whose degree is reported as -1.
    """

    coeffs: tuple[complex, ...]

    def __post_init__(self):
        cs = [_require_finite(c, "polynomial coefficient") for c in self.coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    # -- structure -----------------------------------------------------

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    @property
    def leading(self) -> complex:
        if self.is_zero:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def constant_value(self) -> complex:
        if not self.is_constant:
            raise ValueError(f"degree-{self.degree} polynomial is not a constant")
        return self.coeffs[0] if self.coeffs else 0j

    # -- arithmetic ----------------------------------------------------

    def __call__(self, z: complex) -> complex:
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def __add__(self, other: "Polynomial") -> "Polynomial":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for k, c in enumerate(b):
            out[k] += c
        return Polynomial(tuple(out))

    def __neg__(self) -> "Polynomial":
        return Polynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        if self.is_zero or other.is_zero:
            return Polynomial(())
        out = [0j] * (len(self.coeffs) + len(other.coeffs) - 1)
        for j, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for k, b in enumerate(other.coeffs):
                out[j + k] += a * b
        return Polynomial(tuple(out))

    def scaled(self, c: complex) -> "Polynomial":
        c = _require_finite(c, "scalar")
        return Polynomial(tuple(c * a for a in self.coeffs))

    def derivative(self) -> "Polynomial":
        return Polynomial(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    # -- constructors --------------------------------------------------

    @staticmethod
    def zero() -> "Polynomial":
        return Polynomial(())

    @staticmethod
    def constant(c: complex) -> "Polynomial":
        return Polynomial((complex(c),))

    @staticmethod
    def monomial(k: int, c: complex = 1) -> "Polynomial":
        if k < 0:
            raise ValueError("monomial degree must be nonnegative")
        return Polynomial((0j,) * k + (complex(c),))


# ---------------------------------------------------------------------------
# log-polar values

_LOG_MAX_DOUBLE = math.log(1.7976931348623157e308)  # ~709.78


def _norm_phase(ph: float) -> float:
    """Reduce a phase to (-pi, pi]."""
    ph = math.remainder(ph, _TWO_PI)
    if ph == -math.pi:
        ph = math.pi
    return ph


@dataclass(frozen=True)
class LogPolarValue:
    """A complex value stored as (log-magnitude, phase).

    log_magnitude == -inf encodes an exact zero (phase fixed at 0).  The
    representation survives magnitudes far past double range; conversion back
    to a plain complex raises once exp(log_magnitude) would overflow.
    """

    log_magnitude: float
    phase: float = 0.0

    def __post_init__(self):
        lm = float(self.log_magnitude)
        if math.isnan(lm) or lm == math.inf:
            raise ValueError(f"log magnitude must be finite or -inf, got {lm}")
        ph = 0.0 if lm == -math.inf else _norm_phase(float(self.phase))
        object.__setattr__(self, "log_magnitude", lm)
        object.__setattr__(self, "phase", ph)

    @staticmethod
    def zero() -> "LogPolarValue":
        return LogPolarValue(-math.inf, 0.0)

    @staticmethod
    def from_complex(w: complex) -> "LogPolarValue":
        w = complex(w)
        if not (math.isfinite(w.real) and math.isfinite(w.imag)):
            raise ValueError(f"cannot take log-polar form of non-finite {w!r}")
        if w == 0:
            return LogPolarValue.zero()
        return LogPolarValue(math.log(abs(w)), cmath.phase(w))

    @property
    def is_zero(self) -> bool:
        return self.log_magnitude == -math.inf

    def to_complex(self) -> complex:
        if self.is_zero:
            return 0j
        if self.log_magnitude > _LOG_MAX_DOUBLE:
            raise OverflowError(
                f"log-magnitude {self.log_magnitude:.6g} exceeds double range"
            )
        return cmath.rect(math.exp(self.log_magnitude), self.phase)

    def __mul__(self, other: "LogPolarValue") -> "LogPolarValue":
        if self.is_zero or other.is_zero:
            return LogPolarValue.zero()
        return LogPolarValue(
            self.log_magnitude + other.log_magnitude, self.phase + other.phase
        )

    def __neg__(self) -> "LogPolarValue":
        if self.is_zero:
            return self
        return LogPolarValue(self.log_magnitude, self.phase + math.pi)


def logpolar_sum(values) -> LogPolarValue:
    """Sum of log-polar values, anchored at the largest log-magnitude.

    The remaining terms are scaled down by the anchor (so every addend has
    magnitude <= 1) and accumulated with compensated summation in descending
    magnitude order.  Catastrophic growth is impossible; cancellation down to
    machine noise around the anchor is the honest answer.
    """
    vals = [v for v in values if not v.is_zero]
    if not vals:
        return LogPolarValue.zero()
    anchor = max(v.log_magnitude for v in vals)
    vals.sort(key=lambda v: v.log_magnitude, reverse=True)
    res, ims = [], []
    for v in vals:
        m = math.exp(v.log_magnitude - anchor)
        res.append(m * math.cos(v.phase))
        ims.append(m * math.sin(v.phase))
    s = complex(math.fsum(res), math.fsum(ims))
    if s == 0:
        return LogPolarValue.zero()
    return LogPolarValue(anchor + math.log(abs(s)), cmath.phase(s))


# ---------------------------------------------------------------------------
# expression trees


class CoeffExpr:
    """Base class for canonical coefficient expressions."""

    __slots__ = ()

    # operator sugar; each delegates to a canonicalizing constructor
    def __add__(self, other):
        return summation([self, _as_expr(other)])

    def __radd__(self, other):
        return summation([_as_expr(other), self])

    def __sub__(self, other):
        return summation([self, -_as_expr(other)])

    def __rsub__(self, other):
        return summation([_as_expr(other), -self])

    def __mul__(self, other):
        return product([self, _as_expr(other)])

    def __rmul__(self, other):
        return product([_as_expr(other), self])

    def __neg__(self):
        return scale(-1, self)

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ExpressionError("powers must be nonnegative integers")
        out: CoeffExpr = PolyLeaf(Polynomial.constant(1))
        for _ in range(k):
            out = product([out, self])
        return out

    def __str__(self) -> str:
        return _print(self)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({_print(self)!r})"


@dataclass(frozen=True, repr=False)
class PolyLeaf(CoeffExpr):
    poly: Polynomial


@dataclass(frozen=True, repr=False)
class ExpPoly(CoeffExpr):
    """exp(exponent) with a nonconstant polynomial exponent."""

    exponent: Polynomial

    def __post_init__(self):
        if self.exponent.is_constant:
            raise ExpressionError(
                "ExpPoly exponent must be nonconstant; use exp_of() to fold constants"
            )


@dataclass(frozen=True, repr=False)
class Sum(CoeffExpr):
    terms: tuple[CoeffExpr, ...]


@dataclass(frozen=True, repr=False)
class Product(CoeffExpr):
    factors: tuple[CoeffExpr, ...]


def _as_expr(x) -> CoeffExpr:
    if isinstance(x, CoeffExpr):
        return x
    if isinstance(x, (int, float, complex)):
        return PolyLeaf(Polynomial.constant(x))
    raise TypeError(f"cannot coerce {x!r} to a coefficient expression")


# convenience constructors ---------------------------------------------------


def poly(*coeffs) -> PolyLeaf:
    """Polynomial leaf from coefficients, lowest degree first."""
    return PolyLeaf(Polynomial(tuple(complex(c) for c in coeffs)))


def const(c) -> PolyLeaf:
    return PolyLeaf(Polynomial.constant(c))


Z = poly(0, 1)


def exp_of(arg) -> CoeffExpr:
    """exp(arg); arg must canonicalize to a polynomial."""
    arg = _as_expr(arg)
    if not isinstance(arg, PolyLeaf):
        raise ExpressionError("exp argument must reduce to a polynomial")
    p = arg.poly
    if p.is_constant:
        return PolyLeaf(Polynomial.constant(cmath.exp(p.constant_value())))
    return ExpPoly(p)


def summation(terms) -> CoeffExpr:
    """Canonical sum: flattens, merges polynomial terms, drops zeros."""
    flat: list[CoeffExpr] = []
    for t in terms:
        t = _as_expr(t)
        if isinstance(t, Sum):
            flat.extend(t.terms)
        else:
            flat.append(t)
    poly_acc = Polynomial.zero()
    poly_slot = None  # position of the merged polynomial term
    out: list[CoeffExpr] = []
    for t in flat:
        if isinstance(t, PolyLeaf):
            poly_acc = poly_acc + t.poly
            if poly_slot is None:
                poly_slot = len(out)
                out.append(t)  # placeholder, replaced below
        else:
            out.append(t)
    if poly_slot is not None:
        if poly_acc.is_zero:
            del out[poly_slot]
        else:
            out[poly_slot] = PolyLeaf(poly_acc)
    if not out:
        return PolyLeaf(Polynomial.zero())
    if len(out) == 1:
        return out[0]
    return Sum(tuple(out))


def product(factors) -> CoeffExpr:
    """Canonical product: one polynomial factor first, one exp factor last.

    Sum factors (e.g. the h in (e^{z^2}+1)*e^z) are preserved in order
    between the two.  A structural zero annihilates the product.
    """
    flat: list[CoeffExpr] = []
    for f in factors:
        f = _as_expr(f)
        if isinstance(f, Product):
            flat.extend(f.factors)
        else:
            flat.append(f)
    poly_acc = Polynomial.constant(1)
    exp_acc = Polynomial.zero()
    rest: list[CoeffExpr] = []
    for f in flat:
        if isinstance(f, PolyLeaf):
            poly_acc = poly_acc * f.poly
            if poly_acc.is_zero:
                return PolyLeaf(Polynomial.zero())
        elif isinstance(f, ExpPoly):
            exp_acc = exp_acc + f.exponent
        else:
            rest.append(f)
    out: list[CoeffExpr] = []
    if not exp_acc.is_zero and exp_acc.is_constant:
        # exp factors cancelled down to a scalar
        poly_acc = poly_acc.scaled(cmath.exp(exp_acc.constant_value()))
        exp_acc = Polynomial.zero()
    trivial_poly = poly_acc == Polynomial.constant(1)
    if not trivial_poly or (not rest and exp_acc.is_zero):
        out.append(PolyLeaf(poly_acc))
    out.extend(rest)
    if not exp_acc.is_zero:
        out.append(ExpPoly(exp_acc))
    if not out:
        return PolyLeaf(Polynomial.constant(1))
    if len(out) == 1:
        return out[0]
    return Product(tuple(out))


def scale(c, expr) -> CoeffExpr:
    """c * expr for a complex scalar c, canonicalized."""
    c = _require_finite(complex(c), "scalar")
    return product([const(c), _as_expr(expr)])


# ---------------------------------------------------------------------------
# evaluation


def evaluate(expr: CoeffExpr, z: complex) -> LogPolarValue:
    """Evaluate at z in log-polar form.

    exp factors never leave the log channel, so e^{z^2} at |z| = 50 is exact
    to rounding; only the polynomial parts are computed in plain arithmetic.
    """
    if isinstance(expr, PolyLeaf):
        return LogPolarValue.from_complex(expr.poly(z))
    if isinstance(expr, ExpPoly):
        w = expr.exponent(z)
        return LogPolarValue(w.real, w.imag)
    if isinstance(expr, Product):
        out = LogPolarValue(0.0, 0.0)
        for f in expr.factors:
            out = out * evaluate(f, z)
        return out
    if isinstance(expr, Sum):
        return logpolar_sum(evaluate(t, z) for t in expr.terms)
    raise TypeError(f"not a coefficient expression: {expr!r}")


def evaluator(expr: CoeffExpr):
    """Callable z -> LogPolarValue, the shape the growth metrics consume."""
    return lambda z: evaluate(expr, z)


def compile_complex(expr: CoeffExpr):
    """Compile to a fast z -> complex closure in plain arithmetic.

    Used by the ray integrator, whose renormalized state keeps every needed
    value inside double range.  Overflow in an exp factor surfaces as
    OverflowError from cmath.exp.
    """
    src = _codegen(expr)
    code = compile(src, "<coeff-expr>", "eval")
    return eval(code, {"exp": cmath.exp, "__builtins__": {}})


def _poly_code(p: Polynomial) -> str:
    if p.is_zero:
        return "0j"
    body = repr(complex(p.coeffs[-1]))
    for c in reversed(p.coeffs[:-1]):
        body = f"{complex(c)!r} + z*({body})"
    return f"({body})"


def _expr_code(e: CoeffExpr) -> str:
    if isinstance(e, PolyLeaf):
        return _poly_code(e.poly)
    if isinstance(e, ExpPoly):
        return f"exp({_poly_code(e.exponent)})"
    if isinstance(e, Product):
        return "(" + "*".join(_expr_code(f) for f in e.factors) + ")"
    if isinstance(e, Sum):
        return "(" + " + ".join(_expr_code(t) for t in e.terms) + ")"
    raise TypeError(f"not a coefficient expression: {e!r}")


def _codegen(expr: CoeffExpr) -> str:
    return f"lambda z: {_expr_code(expr)}"


# ---------------------------------------------------------------------------
# differentiation and growth order


def differentiate(expr: CoeffExpr) -> CoeffExpr:
    """d/dz, staying inside the grammar (canonical output)."""
    if isinstance(expr, PolyLeaf):
        return PolyLeaf(expr.poly.derivative())
    if isinstance(expr, ExpPoly):
        return product([PolyLeaf(expr.exponent.derivative()), expr])
    if isinstance(expr, Sum):
        return summation(differentiate(t) for t in expr.terms)
    if isinstance(expr, Product):
        fs = expr.factors
        terms = []
        for i in range(len(fs)):
            terms.append(product([*fs[:i], differentiate(fs[i]), *fs[i + 1 :]]))
        return summation(terms)
    raise TypeError(f"not a coefficient expression: {expr!r}")


def symbolic_order(expr: CoeffExpr) -> float:
    """Nevanlinna order read off the structure.

    Polynomials have order 0; exp(P) has order deg P; sums and products take
    the max over children.  Exact for everything the grammar can write.
    """
    if isinstance(expr, PolyLeaf):
        return 0.0
    if isinstance(expr, ExpPoly):
        return float(expr.exponent.degree)
    if isinstance(expr, Sum):
        return max(symbolic_order(t) for t in expr.terms)
    if isinstance(expr, Product):
        return max(symbolic_order(f) for f in expr.factors)
    raise TypeError(f"not a coefficient expression: {expr!r}")


def is_polynomial(expr: CoeffExpr) -> bool:
    return isinstance(expr, PolyLeaf)


def is_zero_expr(expr: CoeffExpr) -> bool:
    return isinstance(expr, PolyLeaf) and expr.poly.is_zero


def split_exp_factor(expr: CoeffExpr):
    """Structural h * e^P split of a canonical expression.

    Returns (h, P) with h a CoeffExpr and P a nonconstant Polynomial when the
    expression is an exp factor or a product carrying one; None otherwise
    (polynomials, and sums like e^z + z, have no top-level exp factor).
    """
    if isinstance(expr, ExpPoly):
        return PolyLeaf(Polynomial.constant(1)), expr.exponent
    if isinstance(expr, Product):
        exps = [f for f in expr.factors if isinstance(f, ExpPoly)]
        if len(exps) != 1:
            return None  # canonical products carry at most one; none means no split
        rest = [f for f in expr.factors if not isinstance(f, ExpPoly)]
        h = product(rest) if rest else PolyLeaf(Polynomial.constant(1))
        return h, exps[0].exponent
    return None


# ---------------------------------------------------------------------------
# printing


def _fmt_float(x: float) -> str:
    if x == int(x) and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def _fmt_coeff(c: complex) -> str:
    """Standalone text for a complex coefficient; may start with '-'."""
    if c.imag == 0:
        return _fmt_float(c.real)
    if c.real == 0:
        return _fmt_float(c.imag) + "i"
    im = c.imag
    sign = "-" if im < 0 else "+"
    return f"({_fmt_float(c.real)} {sign} {_fmt_float(abs(im))}i)"


def _mono(k: int) -> str:
    if k == 0:
        return ""
    return "z" if k == 1 else f"z^{k}"


def _print_poly(p: Polynomial) -> str:
    if p.is_zero:
        return "0"
    parts = []
    for k, c in enumerate(p.coeffs):
        if c == 0:
            continue
        m = _mono(k)
        if not m:
            parts.append(_fmt_coeff(c))
        elif c == 1:
            parts.append(m)
        elif c == -1:
            parts.append("-" + m)
        else:
            parts.append(f"{_fmt_coeff(c)}*{m}")
    return _join_signed(parts)


def _join_signed(parts: list[str]) -> str:
    out = parts[0]
    for p in parts[1:]:
        if p.startswith("-"):
            out += " - " + p[1:]
        else:
            out += " + " + p
    return out


def _print_factor(f: CoeffExpr) -> str:
    if isinstance(f, PolyLeaf):
        txt = _print_poly(f.poly)
        # multi-term polynomials need parens inside a product
        if " + " in txt or " - " in txt:
            return f"({txt})"
        return txt
    if isinstance(f, ExpPoly):
        return f"exp({_print_poly(f.exponent)})"
    if isinstance(f, Sum):
        return f"({_print(f)})"
    if isinstance(f, Product):
        return f"({_print(f)})"  # not produced by canonical trees
    raise TypeError(f"not a coefficient expression: {f!r}")


def _print(e: CoeffExpr) -> str:
    if isinstance(e, PolyLeaf):
        return _print_poly(e.poly)
    if isinstance(e, ExpPoly):
        return f"exp({_print_poly(e.exponent)})"
    if isinstance(e, Product):
        fs = e.factors
        if isinstance(fs[0], PolyLeaf) and fs[0].poly == Polynomial.constant(-1):
            return "-" + "*".join(_print_factor(f) for f in fs[1:])
        return "*".join(_print_factor(f) for f in fs)
    if isinstance(e, Sum):
        # canonical sums hold only PolyLeaf / ExpPoly / Product terms
        return _join_signed([_print(t) for t in e.terms])
    raise TypeError(f"not a coefficient expression: {e!r}")


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?i?)"
    r"|(?P<name>[A-Za-z_]+)"
    r"|(?P<op>[-+*^()]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            if text[pos:].strip() == "":
                break
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup == "number":
            tokens.append(("number", m.group("number"), m.start("number")))
        elif m.lastgroup == "name":
            tokens.append(("name", m.group("name"), m.start("name")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def next(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect_op(self, op: str):
        kind, val, pos = self.next()
        if kind != "op" or val != op:
            raise ExpressionSyntaxError(f"expected {op!r}, found {val!r}", pos)

    def parse(self) -> CoeffExpr:
        e = self.parse_expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected trailing {val!r}", pos)
        return e

    def parse_expr(self) -> CoeffExpr:
        kind, val, _ = self.peek()
        lead_neg = False
        if kind == "op" and val in "+-":
            self.next()
            lead_neg = val == "-"
        term = self.parse_term()
        if lead_neg:
            term = scale(-1, term)
        terms = [term]
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                t = self.parse_term()
                terms.append(scale(-1, t) if val == "-" else t)
            else:
                break
        return summation(terms)

    def parse_term(self) -> CoeffExpr:
        factors = [self.parse_factor()]
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == "*":
                self.next()
                factors.append(self.parse_factor())
            else:
                break
        return product(factors)

    def parse_factor(self) -> CoeffExpr:
        kind, val, pos = self.next()
        if kind == "number":
            if val.endswith("i"):
                return const(complex(0.0, float(val[:-1])))
            return const(float(val))
        if kind == "name":
            if val == "i":
                return const(1j)
            if val == "z":
                k = 1
                kind2, val2, _ = self.peek()
                if kind2 == "op" and val2 == "^":
                    self.next()
                    kind3, val3, pos3 = self.next()
                    if kind3 != "number" or not val3.isdigit():
                        raise ExpressionSyntaxError(
                            "exponent must be an unsigned integer", pos3
                        )
                    k = int(val3)
                return PolyLeaf(Polynomial.monomial(k))
            if val == "exp":
                self.expect_op("(")
                inner = self.parse_expr()
                self.expect_op(")")
                if not isinstance(inner, PolyLeaf):
                    raise ExpressionSyntaxError(
                        "exp argument must reduce to a polynomial", pos
                    )
                return exp_of(inner)
            raise ExpressionSyntaxError(f"unknown name {val!r}", pos)
        if kind == "op" and val == "(":
            inner = self.parse_expr()
            self.expect_op(")")
            return inner
        raise ExpressionSyntaxError(f"expected a factor, found {val!r}", pos)


def parse_expression(text: str) -> CoeffExpr:
    """Parse the coefficient grammar into a canonical tree."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# equation specs


@dataclass(frozen=True)
class DeclaredProps:
    """Hypotheses that cannot be decided from the expression structure.

    These are trusted declarations; the classifier marks any hypothesis that
    rests on one as 'declared' in its trace.
    """

    fabry_gaps: bool = False
    multiply_connected_fatou: bool = False
    lambda_lt_rho: bool = False
    h_bounded_away_on_Eplus_blows_up_on_Eminus: bool = False
    mu_B: float | None = None
    notes: str = ""

    def __post_init__(self):
        if self.mu_B is not None:
            mu = float(self.mu_B)
            if not math.isfinite(mu) or mu < 0:
                raise InvalidEquationError(f"mu_B must be finite and >= 0, got {mu}")
            object.__setattr__(self, "mu_B", mu)


@dataclass(frozen=True)
class EquationSpec:
    """f'' + A f' + B f = H, with H = None meaning the homogeneous equation."""

    name: str
    A: CoeffExpr
    B: CoeffExpr
    H: CoeffExpr | None = None
    declared: DeclaredProps = field(default_factory=DeclaredProps)

    def __post_init__(self):
        if is_zero_expr(self.B):
            raise InvalidEquationError("B must not be identically zero")
        if self.H is not None and is_zero_expr(self.H):
            object.__setattr__(self, "H", None)
        if self.declared.mu_B is not None:
            rho_b = symbolic_order(self.B)
            if self.declared.mu_B > rho_b + 1e-12:
                raise InvalidEquationError(
                    f"declared mu_B={self.declared.mu_B} exceeds the order "
                    f"{rho_b} of B"
                )

    @property
    def homogeneous(self) -> bool:
        return self.H is None

    def homogeneous_part(self) -> "EquationSpec":
        if self.homogeneous:
            return self
        return replace(self, H=None)
