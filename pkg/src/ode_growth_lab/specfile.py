"""Equation spec files: a small JSON document mapped onto EquationSpec.

The format is deliberately flat so files stay diff-friendly:

    {
      "name": "my-equation",
      "A": "exp(z^2)",
      "B": "z^3",
      "H": "z + 1",
      "declared": {"fabry_gaps": true, "mu_B": 1.0, "notes": "..."}
    }

A and B are required; name defaults to the file stem; H and declared are
optional.  Expressions use the coefficient grammar.  Every validation error
names the offending field.
"""

from __future__ import annotations

import json
import pathlib

from .expressions import (
    DeclaredProps,
    EquationSpec,
    ExpressionSyntaxError,
    InvalidEquationError,
    parse_expression,
)


class SpecFileError(ValueError):
    """Raised for unreadable, malformed, or semantically invalid spec files."""


_TOP_FIELDS = {"name", "A", "B", "H", "declared"}
_DECLARED_BOOL_FIELDS = (
    "fabry_gaps",
    "multiply_connected_fatou",
    "lambda_lt_rho",
    "h_bounded_away_on_Eplus_blows_up_on_Eminus",
)


def _parse_field(doc: dict, field: str, where: str):
    text = doc[field]
    if not isinstance(text, str):
        raise SpecFileError(f"{where}: {field} must be an expression string")
    try:
        return parse_expression(text)
    except ExpressionSyntaxError as exc:
        raise SpecFileError(f"{where}: {field}: {exc}") from exc


def _parse_declared(raw, where: str) -> DeclaredProps:
    if raw is None:
        return DeclaredProps()
    if not isinstance(raw, dict):
        raise SpecFileError(f"{where}: declared must be an object")
    known = set(_DECLARED_BOOL_FIELDS) | {"mu_B", "notes"}
    for key in raw:
        if key not in known:
            raise SpecFileError(f"{where}: declared.{key}: unknown field")
    kwargs = {}
    for key in _DECLARED_BOOL_FIELDS:
        if key in raw:
            if not isinstance(raw[key], bool):
                raise SpecFileError(f"{where}: declared.{key} must be a boolean")
            kwargs[key] = raw[key]
    if "mu_B" in raw and raw["mu_B"] is not None:
        if isinstance(raw["mu_B"], bool) or not isinstance(raw["mu_B"], (int, float)):
            raise SpecFileError(f"{where}: declared.mu_B must be a number")
        kwargs["mu_B"] = float(raw["mu_B"])
    if "notes" in raw:
        if not isinstance(raw["notes"], str):
            raise SpecFileError(f"{where}: declared.notes must be a string")
        kwargs["notes"] = raw["notes"]
    try:
        return DeclaredProps(**kwargs)
    except InvalidEquationError as exc:
        raise SpecFileError(f"{where}: declared: {exc}") from exc


def load_spec(path) -> EquationSpec:
    """Read and validate a spec file; errors carry the field path."""
    p = pathlib.Path(path)
    where = str(p)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecFileError(f"{where}: cannot read: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecFileError(f"{where}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SpecFileError(f"{where}: top level must be an object")
    for key in doc:
        if key not in _TOP_FIELDS:
            raise SpecFileError(f"{where}: {key}: unknown field")
    for required in ("A", "B"):
        if required not in doc:
            raise SpecFileError(f"{where}: {required} required")

    name = doc.get("name", p.stem)
    if not isinstance(name, str) or not name:
        raise SpecFileError(f"{where}: name must be a non-empty string")
    A = _parse_field(doc, "A", where)
    B = _parse_field(doc, "B", where)
    H = _parse_field(doc, "H", where) if doc.get("H") is not None else None
    declared = _parse_declared(doc.get("declared"), where)
    try:
        return EquationSpec(name, A, B, H, declared=declared)
    except InvalidEquationError as exc:
        raise SpecFileError(f"{where}: {exc}") from exc
