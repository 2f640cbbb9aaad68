"""Analysis report assembly: one JSON document, optional CSV and figure views.

The report is self-describing (schema field "ode-growth-lab/1") and built
to be byte-deterministic for identical inputs: keys are sorted, floats are
serialized by ``json`` verbatim, and non-finite values are mapped to null
before encoding.  Figures are a rendering of the same data and carry no
byte-stability promise.
"""

from __future__ import annotations

import csv
import json
import math
import pathlib

from .classifier import classify
from .expressions import EquationSpec, PolyLeaf, split_exp_factor
from .growth import GrowthProfile, OrderEstimate, ProfileError, order_estimate
from .indicator import SectorDecomposition, critical_rays_exp, critical_rays_poly
from .ray_engine import IntegratorConfig, RayIntegrationError, solution_growth_profile

SCHEMA = "ode-growth-lab/1"

_DEFAULT_RADII = tuple(2.0 * 6.0 ** (k / 7) for k in range(8))


class ReportValidationError(ValueError):
    """Raised when a report document does not match the schema."""


# ---------------------------------------------------------------------------
# building


def _finite(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _declared_doc(spec: EquationSpec) -> dict:
    d = spec.declared
    return {
        "fabry_gaps": d.fabry_gaps,
        "multiply_connected_fatou": d.multiply_connected_fatou,
        "lambda_lt_rho": d.lambda_lt_rho,
        "h_bounded_away_on_Eplus_blows_up_on_Eminus": (
            d.h_bounded_away_on_Eplus_blows_up_on_Eminus
        ),
        "mu_B": _finite(d.mu_B),
        "notes": d.notes,
    }


def _verdict_doc(v) -> dict:
    return {
        "key": v.key(),
        "rule": v.rule.value if v.rule is not None else None,
        "conclusion": v.conclusion.value,
        "hyper_order": _finite(v.hyper_order),
        "citation": v.citation,
        "hypotheses": [
            {
                "name": h.name,
                "value": h.value,
                "satisfied": h.satisfied,
                "declared": h.declared,
            }
            for h in v.hypotheses_checked
        ],
    }


def _decomposition_doc(dec: SectorDecomposition, source: str) -> dict:
    return {
        "source": source,
        "degree": dec.degree,
        "rays": list(dec.rays),
        "sectors": [
            {"theta_low": s.theta_low, "theta_high": s.theta_high, "sign": s.sign}
            for s in dec.sectors
        ],
    }


def _geometry_doc(spec: EquationSpec) -> dict:
    indicator = None
    split = split_exp_factor(spec.A)
    if split is not None:
        _, p = split
        indicator = _decomposition_doc(critical_rays_exp(p), "A")
    polynomial_rays = None
    if isinstance(spec.B, PolyLeaf) and spec.B.poly.degree >= 1:
        polynomial_rays = {
            "source": "B",
            "degree": spec.B.poly.degree,
            "rays": list(critical_rays_poly(spec.B.poly)),
        }
    return {"indicator": indicator, "polynomial_rays": polynomial_rays}


def profile_doc(profile: GrowthProfile) -> dict:
    return {
        "label": profile.label,
        "entries": [
            {
                "r": e.r,
                "log_max": _finite(e.log_max_modulus),
                "log_min": _finite(e.log_min_modulus),
                "argmax_theta": e.argmax_theta,
            }
            for e in profile.entries
        ],
    }


def _estimate_doc(label: str, est: OrderEstimate | None, note: str = "") -> dict:
    if est is None:
        return {
            "label": label,
            "kind": "order",
            "value": None,
            "fit_residual": None,
            "radii_used": None,
            "note": note,
        }
    return {
        "label": label,
        "kind": est.kind,
        "value": _finite(est.value),
        "fit_residual": _finite(est.fit_residual),
        "radii_used": list(est.radii_used),
        "note": est.note,
    }


def build_report(
    spec: EquationSpec,
    profile_radii=None,
    angular_samples: int = 32,
    config: IntegratorConfig | None = None,
) -> dict:
    """Classify, lay out the ray geometry, and profile the solution growth.

    Equations whose coefficients grow fast enough to stall the explicit
    integrator (a step budget failure) still get a report; the profile list
    is then empty and the order-estimate entry records the reason.
    """
    radii = list(profile_radii) if profile_radii is not None else list(_DEFAULT_RADII)
    label = f"solution of {spec.name}"
    try:
        profile = solution_growth_profile(
            spec, radii, angular_samples=angular_samples, config=config
        )
    except RayIntegrationError as exc:
        profiles = []
        est_doc = _estimate_doc(label, None, note=f"profile not computed: {exc}")
    else:
        labeled = GrowthProfile(profile.entries, label=label)
        profiles = [profile_doc(labeled)]
        try:
            est_doc = _estimate_doc(label, order_estimate(labeled))
        except ProfileError as exc:
            est_doc = _estimate_doc(label, None, note=str(exc))
    return {
        "schema": SCHEMA,
        "name": spec.name,
        "equation": {
            "A": str(spec.A),
            "B": str(spec.B),
            "H": None if spec.H is None else str(spec.H),
            "declared": _declared_doc(spec),
            "homogeneous": spec.homogeneous,
        },
        "verdicts": [_verdict_doc(v) for v in classify(spec)],
        "geometry": _geometry_doc(spec),
        "profiles": profiles,
        "order_estimates": [est_doc],
        "scenario_results": None,
    }


# ---------------------------------------------------------------------------
# serialization


def dumps_report(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_report_json(doc: dict, path) -> pathlib.Path:
    path = pathlib.Path(path)
    path.write_text(dumps_report(doc), encoding="utf-8")
    return path


def write_sample_csv(samples, fh) -> int:
    """Stream integration samples as CSV rows; returns the row count."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(
        ["t", "log_abs_f", "phase_f", "log_abs_fprime", "phase_fprime", "rescale"]
    )
    count = 0
    for s in samples:
        w.writerow(
            [s.t, s.log_abs_f, s.phase_f, s.log_abs_fprime, s.phase_fprime,
             s.accumulated_rescale]
        )
        count += 1
    return count


def write_profile_csv(profile_doc: dict, fh) -> int:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["r", "log_max", "log_min", "argmax_theta"])
    count = 0
    for e in profile_doc["entries"]:
        w.writerow(
            [
                e["r"],
                e["log_max"],
                "" if e["log_min"] is None else e["log_min"],
                e["argmax_theta"],
            ]
        )
        count += 1
    return count


def write_report_csvs(doc: dict, outdir) -> list[pathlib.Path]:
    """The delimited view of a report: verdicts, geometry, profile, estimates."""
    outdir = pathlib.Path(outdir)
    written = []

    path = outdir / "verdicts.csv"
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["key", "conclusion", "hyper_order", "citation"])
        for v in doc["verdicts"]:
            w.writerow(
                [v["key"], v["conclusion"],
                 "" if v["hyper_order"] is None else v["hyper_order"],
                 v["citation"]]
            )
    written.append(path)

    path = outdir / "geometry.csv"
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["record", "source", "index", "theta_low", "theta_high", "sign"])
        geo = doc["geometry"]
        for block in (geo["indicator"],):
            if block is None:
                continue
            for i, theta in enumerate(block["rays"]):
                w.writerow(["ray", block["source"], i, theta, "", ""])
            for i, s in enumerate(block["sectors"]):
                w.writerow(
                    ["sector", block["source"], i, s["theta_low"], s["theta_high"],
                     s["sign"]]
                )
        if geo["polynomial_rays"] is not None:
            block = geo["polynomial_rays"]
            for i, theta in enumerate(block["rays"]):
                w.writerow(["ray", block["source"], i, theta, "", ""])
    written.append(path)

    path = outdir / "profile.csv"
    with path.open("w", encoding="utf-8", newline="") as fh:
        for profile_doc in doc["profiles"]:
            write_profile_csv(profile_doc, fh)
    written.append(path)

    path = outdir / "order_estimates.csv"
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "kind", "value", "fit_residual", "r_lo", "r_hi", "note"])
        for e in doc["order_estimates"]:
            lo, hi = ("", "") if e["radii_used"] is None else e["radii_used"]
            w.writerow(
                [e["label"], e["kind"],
                 "" if e["value"] is None else e["value"],
                 "" if e["fit_residual"] is None else e["fit_residual"],
                 lo, hi, e["note"]]
            )
    written.append(path)
    return written


# ---------------------------------------------------------------------------
# validation


def _expect(cond: bool, path: str, message: str):
    if not cond:
        raise ReportValidationError(f"{path}: {message}")


def _check_number_or_null(doc, path):
    _expect(
        doc is None or (isinstance(doc, (int, float)) and not isinstance(doc, bool)),
        path,
        "must be a number or null",
    )


def validate_report(doc) -> None:
    """Schema check for an emitted (or re-loaded) report document."""
    _expect(isinstance(doc, dict), "report", "must be an object")
    _expect(doc.get("schema") == SCHEMA, "schema", f"must be {SCHEMA!r}")
    for key in (
        "name", "equation", "verdicts", "geometry", "profiles", "order_estimates",
    ):
        _expect(key in doc, key, "required")
    _expect(isinstance(doc["name"], str) and doc["name"], "name", "non-empty string")

    eq = doc["equation"]
    _expect(isinstance(eq, dict), "equation", "must be an object")
    for key in ("A", "B"):
        _expect(
            isinstance(eq.get(key), str) and eq[key], f"equation.{key}",
            "non-empty string",
        )
    _expect(
        eq.get("H") is None or isinstance(eq["H"], str), "equation.H",
        "string or null",
    )
    _expect(isinstance(eq.get("declared"), dict), "equation.declared", "object")

    _expect(isinstance(doc["verdicts"], list), "verdicts", "must be a list")
    _expect(len(doc["verdicts"]) >= 1, "verdicts", "at least one verdict")
    for i, v in enumerate(doc["verdicts"]):
        where = f"verdicts[{i}]"
        _expect(isinstance(v, dict), where, "must be an object")
        for key in ("key", "conclusion", "citation", "hypotheses"):
            _expect(key in v, f"{where}.{key}", "required")
        _expect(
            isinstance(v["citation"], str) and v["citation"], f"{where}.citation",
            "every verdict carries its citation text",
        )
        _check_number_or_null(v.get("hyper_order"), f"{where}.hyper_order")
        for j, h in enumerate(v["hypotheses"]):
            hw = f"{where}.hypotheses[{j}]"
            _expect(isinstance(h.get("name"), str), f"{hw}.name", "string")
            _expect(isinstance(h.get("satisfied"), bool), f"{hw}.satisfied", "boolean")

    geo = doc["geometry"]
    _expect(isinstance(geo, dict), "geometry", "must be an object")
    for key in ("indicator", "polynomial_rays"):
        _expect(key in geo, f"geometry.{key}", "required (may be null)")
    if geo["indicator"] is not None:
        ind = geo["indicator"]
        n = ind.get("degree")
        _expect(isinstance(n, int) and n >= 1, "geometry.indicator.degree", "int >= 1")
        _expect(
            len(ind.get("rays", ())) == 2 * n, "geometry.indicator.rays",
            "exactly 2n rays",
        )
        sectors = ind.get("sectors", ())
        _expect(len(sectors) == 2 * n, "geometry.indicator.sectors", "exactly 2n")
        for i, s in enumerate(sectors):
            _expect(
                s.get("sign") in (-1, 1), f"geometry.indicator.sectors[{i}].sign",
                "must be -1 or 1",
            )

    _expect(isinstance(doc["profiles"], list), "profiles", "must be a list")
    for i, p in enumerate(doc["profiles"]):
        where = f"profiles[{i}]"
        _expect(isinstance(p.get("entries"), list), f"{where}.entries", "list")
        for j, e in enumerate(p["entries"]):
            _check_number_or_null(e.get("log_max"), f"{where}.entries[{j}].log_max")
            _check_number_or_null(e.get("log_min"), f"{where}.entries[{j}].log_min")

    _expect(isinstance(doc["order_estimates"], list), "order_estimates", "list")
    for i, e in enumerate(doc["order_estimates"]):
        _check_number_or_null(e.get("value"), f"order_estimates[{i}].value")


# ---------------------------------------------------------------------------
# figures


def render_figures(doc: dict, outdir) -> list[pathlib.Path]:
    """Geometry and growth-profile figures next to the delimited output."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    outdir = pathlib.Path(outdir)
    written = []

    geo = doc["geometry"]
    if geo["indicator"] is not None or geo["polynomial_rays"] is not None:
        fig = plt.figure(figsize=(5, 5))
        ax = fig.add_subplot(projection="polar")
        ind = geo["indicator"]
        if ind is not None:
            for s in ind["sectors"]:
                color = "tab:green" if s["sign"] > 0 else "tab:red"
                span = s["theta_high"] - s["theta_low"]
                mid = s["theta_low"] + span / 2
                ax.bar(mid, 1.0, width=span, bottom=0.0, alpha=0.15, color=color)
            for theta in ind["rays"]:
                ax.plot([theta, theta], [0, 1], color="black", lw=1)
        if geo["polynomial_rays"] is not None:
            for theta in geo["polynomial_rays"]["rays"]:
                ax.plot([theta, theta], [0, 1], color="tab:blue", ls="--", lw=1)
        ax.set_yticks([])
        ax.set_title(f"critical rays: {doc['name']}")
        path = outdir / "fig_geometry.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    if any(p["entries"] for p in doc["profiles"]):
        fig, ax = plt.subplots(figsize=(6, 4))
        for p in doc["profiles"]:
            rs = [e["r"] for e in p["entries"]]
            ax.plot(
                rs, [e["log_max"] for e in p["entries"]], marker="o",
                label=p["label"] or "log max",
            )
            if any(e["log_min"] is not None for e in p["entries"]):
                ax.plot(
                    rs,
                    [e["log_min"] for e in p["entries"]],
                    marker=".", ls="--", label="sampled min",
                )
        ax.set_xlabel("r")
        ax.set_ylabel("log modulus")
        ax.legend()
        ax.set_title(f"growth profile: {doc['name']}")
        fig.tight_layout()
        path = outdir / "fig_profiles.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
