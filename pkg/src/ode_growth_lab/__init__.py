"""Growth analysis for second order linear ODEs with entire coefficients.

The package studies f'' + A(z) f' + B(z) f = H(z): which published growth
theorems apply to a given coefficient pair, where the exponential factors
grow and decay (critical rays), what solutions actually do along rays
(overflow-safe integration), and what order of growth the data supports.
"""

from .expressions import (
    CoeffExpr,
    DeclaredProps,
    EquationSpec,
    ExpPoly,
    LogPolarValue,
    PolyLeaf,
    Polynomial,
    Product,
    Sum,
    differentiate,
    evaluate,
    parse_expression,
    symbolic_order,
)

__version__ = "0.1.0"
