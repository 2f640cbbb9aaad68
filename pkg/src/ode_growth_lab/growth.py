"""Growth metrics over circles: max/min modulus profiles and order fits.

Evaluators are callables z -> LogPolarValue, so the metrics work both for
expression trees and for solution data re-wrapped as interpolants.  All the
real analysis happens on log-magnitudes; nothing here ever exponentiates a
large value.

Order of growth is read off a profile by least squares on the iterated
logarithm: order = slope of log log M(r) against log r, hyper-order one log
deeper.  Pure power growth (log M proportional to log r) is detected first
and reported as order zero rather than fed into the fit, where the double
log would manufacture noise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ProfileEntry",
    "GrowthProfile",
    "OrderEstimate",
    "max_modulus_profile",
    "min_modulus_profile",
    "order_estimate",
    "hyper_order_estimate",
    "fit_loglog_slope",
    "nevanlinna_m",
    "log_derivative_profile",
    "compare_growth",
    "ProfileError",
    "ConvergenceError",
]

_TWO_PI = 2.0 * math.pi


class ProfileError(ValueError):
    """Profile unfit for the requested estimate (too short, non-monotone, flat)."""


class ConvergenceError(RuntimeError):
    """Quadrature refinement hit its cap before reaching the tolerance."""


@dataclass(frozen=True)
class ProfileEntry:
    r: float
    log_max_modulus: float
    log_min_modulus: float | None
    argmax_theta: float


@dataclass(frozen=True)
class GrowthProfile:
    entries: tuple[ProfileEntry, ...]
    label: str = ""

    def radii(self) -> list[float]:
        return [e.r for e in self.entries]

    def log_max(self) -> list[float]:
        return [e.log_max_modulus for e in self.entries]


@dataclass(frozen=True)
class OrderEstimate:
    value: float
    fit_residual: float
    radii_used: tuple[float, float]
    kind: str  # "order" | "lower_order" | "hyper_order"
    note: str = ""


_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_extremum(g, lo: float, hi: float, tol: float, sign: float):
    """Golden-section search for the max (sign=+1) or min (sign=-1) of g."""
    a, b = lo, hi
    x1 = b - _INV_GOLDEN * (b - a)
    x2 = a + _INV_GOLDEN * (b - a)
    g1, g2 = sign * g(x1), sign * g(x2)
    while b - a > tol:
        if g1 >= g2:
            b, x2, g2 = x2, x1, g1
            x1 = b - _INV_GOLDEN * (b - a)
            g1 = sign * g(x1)
        else:
            a, x1, g1 = x1, x2, g2
            x2 = a + _INV_GOLDEN * (b - a)
            g2 = sign * g(x2)
    xm = 0.5 * (a + b)
    return xm, sign * (g1 if g1 >= g2 else g2)


def _validate_radii(radii):
    rs = [float(r) for r in radii]
    if not rs:
        raise ValueError("radii must be nonempty")
    if any(r <= 0 for r in rs):
        raise ValueError("radii must be positive")
    if any(b <= a for a, b in zip(rs, rs[1:])):
        raise ValueError("radii must be strictly increasing")
    return rs


def _modulus_profile(f, radii, angular_samples, want_min, label):
    rs = _validate_radii(radii)
    n = int(angular_samples)
    if n < 64:
        raise ValueError(f"angular_samples must be >= 64, got {n}")
    step = _TWO_PI / n
    tol = 1e-3 * step
    entries = []
    for r in rs:
        def g(theta, _r=r):
            return f(_r * complex(math.cos(theta), math.sin(theta))).log_magnitude

        vals = [g(k * step) for k in range(n)]
        kmax = max(range(n), key=vals.__getitem__)
        th_ref, v_ref = _golden_extremum(
            g, (kmax - 1) * step, (kmax + 1) * step, tol, +1.0
        )
        # never let refinement lose to the grid point it started from
        if vals[kmax] >= v_ref:
            th_max, v_max = kmax * step, vals[kmax]
        else:
            th_max, v_max = th_ref % _TWO_PI, v_ref
        v_min = None
        if want_min:
            kmin = min(range(n), key=vals.__getitem__)
            _, v_ref_min = _golden_extremum(
                g, (kmin - 1) * step, (kmin + 1) * step, tol, -1.0
            )
            v_min = min(vals[kmin], v_ref_min)
        entries.append(ProfileEntry(r, v_max, v_min, th_max))
    return GrowthProfile(tuple(entries), label)


def max_modulus_profile(f, radii, angular_samples=64, label="") -> GrowthProfile:
    """log M(r, f) over the given radii.

    f is an evaluator z -> LogPolarValue.  The angular argmax is located on a
    uniform grid and refined by golden-section to 1e-3 of the grid step.
    """
    return _modulus_profile(f, radii, angular_samples, want_min=False, label=label)


def min_modulus_profile(f, radii, angular_samples=64, label="") -> GrowthProfile:
    """As max_modulus_profile, additionally recording log L(r, f) = log min."""
    return _modulus_profile(f, radii, angular_samples, want_min=True, label=label)


# ---------------------------------------------------------------------------
# order fitting


def fit_loglog_slope(radii, values) -> tuple[float, float]:
    """Least-squares slope of log(values) against log(radii), with RMS residual.

    values must be positive; this is the shared backend for order fits and
    for growth-exponent checks on solution data.
    """
    rs = np.asarray(radii, dtype=float)
    vs = np.asarray(values, dtype=float)
    if rs.size < 2:
        raise ValueError("need at least two points to fit a slope")
    if np.any(vs <= 0):
        raise ValueError("values must be positive for a log-log fit")
    x = np.log(rs)
    y = np.log(vs)
    slope, intercept = np.polyfit(x, y, 1)
    rms = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return float(slope), rms


_MIN_DECADES = 1.5
_FLAT_RATIO_SPREAD = 0.05


def _order_prechecks(profile: GrowthProfile, what: str):
    entries = profile.entries
    if len(entries) < 8:
        raise ProfileError(f"{what} needs >= 8 radii, got {len(entries)}")
    r_lo, r_hi = entries[0].r, entries[-1].r
    decades = math.log10(r_hi / r_lo)
    if decades < _MIN_DECADES - 1e-9:
        raise ProfileError(
            f"{what} needs radii spanning >= {_MIN_DECADES} decades, got {decades:.2f}"
        )
    logm = [e.log_max_modulus for e in entries]
    for a, b in zip(logm, logm[1:]):
        if b < a - 1e-9:
            raise ProfileError(f"{what}: log M profile is non-monotone")
    return entries[len(entries) // 2 :]


def _ratio_spread_is_flat(tail, values) -> tuple[bool, float]:
    ratios = [v / math.log(e.r) for e, v in zip(tail, values)]
    spread = max(ratios) - min(ratios)
    return spread <= _FLAT_RATIO_SPREAD * max(1.0, abs(max(ratios))), spread


def order_estimate(profile: GrowthProfile) -> OrderEstimate:
    """Nevanlinna order from a max-modulus profile.

    Polynomial-type growth (log M proportional to log r on the fitted tail)
    short-circuits to order 0 with an explanatory note.
    """
    tail = _order_prechecks(profile, "order_estimate")
    logm = [e.log_max_modulus for e in tail]
    flat, spread = _ratio_spread_is_flat(tail, logm)
    span = (tail[0].r, tail[-1].r)
    if flat:
        return OrderEstimate(
            0.0, spread, span, "order",
            "log M grows like a multiple of log r (polynomial-type); order 0",
        )
    if any(v <= 1.0 for v in logm):
        raise ProfileError(
            "order_estimate needs log M > 1 on the fitted tail; enlarge the radii"
        )
    slope, rms = fit_loglog_slope([e.r for e in tail], logm)
    return OrderEstimate(slope, rms, span, "order")


def hyper_order_estimate(profile: GrowthProfile) -> OrderEstimate:
    """Hyper-order: the same fit one logarithm deeper.

    Finite-order growth (log log M proportional to log r) short-circuits to
    hyper-order 0.
    """
    tail = _order_prechecks(profile, "hyper_order_estimate")
    logm = [e.log_max_modulus for e in tail]
    if any(v <= 1.0 for v in logm):
        raise ProfileError(
            "hyper_order_estimate needs log M > 1 on the tail; enlarge the radii"
        )
    loglogm = [math.log(v) for v in logm]
    flat, spread = _ratio_spread_is_flat(tail, loglogm)
    span = (tail[0].r, tail[-1].r)
    if flat:
        return OrderEstimate(
            0.0, spread, span, "hyper_order",
            "log log M grows like a multiple of log r (finite order); hyper-order 0",
        )
    if any(v <= 1.0 for v in loglogm):
        raise ProfileError(
            "hyper_order_estimate needs log log M > 1 on the fitted tail"
        )
    slope, rms = fit_loglog_slope([e.r for e in tail], loglogm)
    return OrderEstimate(slope, rms, span, "hyper_order")


# ---------------------------------------------------------------------------
# Nevanlinna proximity function


def nevanlinna_m(f, r: float, tol: float = 1e-6, max_refinements: int = 14) -> float:
    """m(r, f) = (1/2pi) integral of log+ |f(r e^{i theta})| d theta.

    Periodic trapezoid rule with doubling; previous evaluations are reused,
    and refinement stops once successive values differ by less than tol.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    if tol <= 0:
        raise ValueError("tol must be positive")

    def logplus(theta):
        return max(0.0, f(r * complex(math.cos(theta), math.sin(theta))).log_magnitude)

    n = 64
    m_val = math.fsum(logplus(_TWO_PI * k / n) for k in range(n)) / n
    for _ in range(max_refinements):
        mid = math.fsum(logplus(_TWO_PI * (k + 0.5) / n) for k in range(n)) / n
        m_new = 0.5 * (m_val + mid)
        n *= 2
        if abs(m_new - m_val) < tol:
            return m_new
        m_val = m_new
    raise ConvergenceError(
        f"m(r) did not settle to {tol} within {max_refinements} refinements"
    )


# ---------------------------------------------------------------------------
# derived profiles


def log_derivative_profile(samples) -> list[tuple[float, float]]:
    """(t, log |f'/f|) from ray samples; samples where f vanishes are skipped."""
    out = []
    skipped = 0
    for s in samples:
        if s.log_abs_f == -math.inf:
            skipped += 1
            continue
        out.append((s.t, s.log_abs_fprime - s.log_abs_f))
    if skipped:
        warnings.warn(
            f"log_derivative_profile: skipped {skipped} sample(s) where f = 0",
            stacklevel=2,
        )
    return out


def compare_growth(g, f, radii, angular_samples=64) -> list[tuple[float, float]]:
    """Per radius, log M(r, g) - log M(r, f)."""
    pg = max_modulus_profile(g, radii, angular_samples)
    pf = max_modulus_profile(f, radii, angular_samples)
    return [
        (eg.r, eg.log_max_modulus - ef.log_max_modulus)
        for eg, ef in zip(pg.entries, pf.entries)
    ]
