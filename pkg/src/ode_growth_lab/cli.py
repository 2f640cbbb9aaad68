"""Command-line front end: classify, rays, integrate, profile, examples, report.

Exit codes: 0 success, 2 validation or hypothesis failure (bad arguments,
bad spec files, failed scenario checks), 1 runtime failure inside the
numerics.  Angles are accepted in radians or as fractions of pi ("pi/4",
"-3pi/2", "0.5pi").  The ODE_GROWTH_LAB_CONFIG environment variable may
point at a JSON file with integrator defaults (rel_tol, abs_floor,
max_step, rescale_threshold, max_steps).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import pathlib
import re
import sys

from .catalog import list_scenarios, run_scenario
from .expressions import ExpressionSyntaxError, InvalidEquationError
from .growth import ConvergenceError, ProfileError
from .ray_engine import (
    IntegratorConfig,
    QuadratureError,
    RayIntegrationError,
    integrate_ray,
    liouville_transform,
    solution_growth_profile,
)
from .report import (
    ReportValidationError,
    build_report,
    render_figures,
    write_profile_csv,
    write_report_csvs,
    write_report_json,
    write_sample_csv,
    profile_doc,
)
from .specfile import SpecFileError, load_spec

_CONFIG_ENV = "ODE_GROWTH_LAB_CONFIG"

_PI_FORM = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)?)\*?pi(?:/((?:\d+\.?\d*|\.\d+)))?$")


def parse_angle(text: str) -> float:
    """Radians, either numeric ("1.57") or a pi fraction ("pi/4", "-3pi/2")."""
    s = text.strip().lower().replace(" ", "")
    m = _PI_FORM.match(s)
    if m:
        coeff_text, den_text = m.groups()
        if coeff_text in ("", "+"):
            coeff = 1.0
        elif coeff_text == "-":
            coeff = -1.0
        else:
            coeff = float(coeff_text)
        value = coeff * math.pi
        if den_text is not None:
            value /= float(den_text)
        return value
    try:
        return float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"cannot parse angle {text!r}; use radians or a pi fraction like pi/4"
        ) from None


def _load_config() -> IntegratorConfig:
    path = os.environ.get(_CONFIG_ENV)
    if not path:
        return IntegratorConfig()
    try:
        doc = json.loads(pathlib.Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecFileError(f"{_CONFIG_ENV}={path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise SpecFileError(f"{_CONFIG_ENV}={path}: top level must be an object")
    allowed = {"rel_tol", "abs_floor", "max_step", "rescale_threshold", "max_steps"}
    unknown = set(doc) - allowed
    if unknown:
        raise SpecFileError(
            f"{_CONFIG_ENV}={path}: unknown field {sorted(unknown)[0]!r}"
        )
    try:
        kwargs = {
            k: int(v) if k == "max_steps" else float(v) for k, v in doc.items()
        }
        return IntegratorConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise SpecFileError(f"{_CONFIG_ENV}={path}: {exc}") from exc


def _geometric_radii(r_min: float, r_max: float, count: int) -> list[float]:
    if not 0 < r_min < r_max:
        raise SpecFileError(f"need 0 < r-min < r-max, got {r_min} and {r_max}")
    if count < 2:
        raise SpecFileError(f"need at least 2 radii, got {count}")
    ratio = r_max / r_min
    return [r_min * ratio ** (k / (count - 1)) for k in range(count)]


# ---------------------------------------------------------------------------
# commands


def _cmd_classify(args) -> int:
    spec = load_spec(args.spec)
    from .classifier import classify

    for v in classify(spec):
        head = f"== {v.key()}: {v.conclusion.value}"
        if v.hyper_order is not None:
            head += f" (hyper-order {v.hyper_order:g})"
        print(head)
        print(f"   citation: {v.citation}")
        for h in v.hypotheses_checked:
            mark = "ok" if h.satisfied else "--"
            declared = " [declared]" if h.declared else ""
            print(f"   [{mark}] {h.name}: {h.value}{declared}")
    return 0


def _cmd_rays(args) -> int:
    spec = load_spec(args.spec)
    from .expressions import PolyLeaf, split_exp_factor
    from .indicator import critical_rays_exp, critical_rays_poly

    printed = False
    split = split_exp_factor(spec.A)
    if split is not None:
        _, p = split
        dec = critical_rays_exp(p)
        print(f"A = h*e^p with deg p = {dec.degree}: {2 * dec.degree} critical rays")
        for i, theta in enumerate(dec.rays):
            print(f"  ray {i}: {theta!r}")
        for i, s in enumerate(dec.sectors):
            sign = "+" if s.sign > 0 else "-"
            print(
                f"  sector {i}: ({s.theta_low:.6f}, {s.theta_high:.6f}) sign {sign}"
            )
        printed = True
    if isinstance(spec.B, PolyLeaf) and spec.B.poly.degree >= 1:
        rays = critical_rays_poly(spec.B.poly)
        print(f"B polynomial of degree {spec.B.poly.degree}: {len(rays)} rays")
        for i, theta in enumerate(rays):
            print(f"  ray {i}: {theta!r}")
        printed = True
    if not printed:
        print(
            "error: no ray geometry: A has no e^p factor and B is not a "
            "nonconstant polynomial",
            file=sys.stderr,
        )
        return 2
    return 0


def _cmd_integrate(args) -> int:
    spec = load_spec(args.spec)
    if args.transformed:
        spec = liouville_transform(spec).transformed_spec()
    config = _load_config()
    samples = integrate_ray(
        spec, args.theta, args.r_min, args.r_max, config=config
    )
    write_sample_csv(samples, sys.stdout)
    return 0


def _cmd_profile(args) -> int:
    spec = load_spec(args.spec)
    config = _load_config()
    radii = _geometric_radii(args.r_min, args.r_max, args.radii)
    profile = solution_growth_profile(
        spec, radii, angular_samples=args.angular, config=config
    )
    write_profile_csv(profile_doc(profile), sys.stdout)
    return 0


def _cmd_examples(args) -> int:
    selected = [
        sc for sc in list_scenarios()
        if args.filter is None or args.filter in sc.scenario_id
    ]
    if not selected:
        print(f"error: no scenario id contains {args.filter!r}", file=sys.stderr)
        return 2
    failures = 0
    for sc in selected:
        rep = run_scenario(sc.scenario_id)
        status = "PASS" if rep.passed else "FAIL"
        print(f"{status} {rep.scenario_id}: {rep.title}")
        for c in rep.checks:
            mark = "ok" if c.passed else "--"
            print(f"   [{mark}] {c.name}: {c.observed} (expected {c.expected})")
        if rep.notes:
            print(f"   note: {rep.notes}")
        if not rep.passed:
            failures += 1
    print(f"{len(selected) - failures}/{len(selected)} scenarios passed")
    return 0 if failures == 0 else 2


def _cmd_report(args) -> int:
    spec = load_spec(args.spec)
    config = _load_config()
    outdir = pathlib.Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    radii = _geometric_radii(args.r_min, args.r_max, args.radii)
    doc = build_report(
        spec, profile_radii=radii, angular_samples=args.angular, config=config
    )
    written = []
    if args.format == "json":
        written.append(write_report_json(doc, outdir / "report.json"))
    else:
        written.extend(write_report_csvs(doc, outdir))
    if not args.no_figures:
        written.extend(render_figures(doc, outdir))
    for path in written:
        print(path)
    return 0


# ---------------------------------------------------------------------------
# parser and dispatch


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ode-growth-lab",
        description=(
            "Growth analysis for f'' + A f' + B f = H with entire "
            "coefficients: classification, critical-ray geometry, ray "
            "integration, and growth profiles."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="apply the infinite-order rules to a spec")
    p.add_argument("spec", help="path to an equation spec file")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("rays", help="critical rays and signed sectors")
    p.add_argument("spec")
    p.set_defaults(func=_cmd_rays)

    p = sub.add_parser("integrate", help="integrate along a ray, CSV to stdout")
    p.add_argument("spec")
    p.add_argument("--theta", type=parse_angle, default=0.0,
                   help="ray angle (radians or pi fraction), default 0")
    p.add_argument("--r-max", type=float, required=True)
    p.add_argument("--r-min", type=float, default=0.0)
    p.add_argument("--transformed", action="store_true",
                   help="integrate the first-order-term-free transformed equation")
    p.set_defaults(func=_cmd_integrate)

    p = sub.add_parser("profile", help="solution growth profile, CSV to stdout")
    p.add_argument("spec")
    p.add_argument("--r-min", type=float, default=2.0)
    p.add_argument("--r-max", type=float, default=12.0)
    p.add_argument("--radii", type=int, default=8, help="number of radii")
    p.add_argument("--angular", type=int, default=32, help="rays in the fan")
    p.set_defaults(func=_cmd_profile)

    p = sub.add_parser("examples", help="run the built-in scenario catalog")
    p.add_argument("--filter", default=None,
                   help="run only scenario ids containing this substring")
    p.set_defaults(func=_cmd_examples)

    p = sub.add_parser("report", help="full analysis bundle to a directory")
    p.add_argument("spec")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--no-figures", action="store_true",
                   help="skip the PNG figures")
    p.add_argument("--r-min", type=float, default=2.0)
    p.add_argument("--r-max", type=float, default=12.0)
    p.add_argument("--radii", type=int, default=8, help="profile radii count")
    p.add_argument("--angular", type=int, default=32, help="rays in the fan")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (
        SpecFileError,
        InvalidEquationError,
        ExpressionSyntaxError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (
        RayIntegrationError,
        QuadratureError,
        ProfileError,
        ConvergenceError,
        ReportValidationError,
        OverflowError,
    ) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
