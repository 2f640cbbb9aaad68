"""Overflow-safe integration of f'' + A f' + B f = H along rays z = t e^{i theta}.

Solutions of these equations routinely reach magnitudes like e^{500000} well
inside the radii of interest, so the integrator carries the state in a
renormalized form: whenever max(|f|, |f'|) drifts past e^{rescale_threshold}
(in either direction), the pair is scaled back to order one and the log of
the scale is accumulated separately.  Samples report true log-magnitudes,
log|f| = log|f_state| + accumulated_rescale, which never overflow.

The stepper is an embedded Dormand-Prince 5(4) pair with a PI step-size
controller.  It is deliberately hand-rolled: renormalization must happen
inside the accept loop, and the step sequence has to be a pure function of
(spec, theta, range, init, config) so that repeated runs are bit-identical.

Coefficients are evaluated through compiled plain-complex closures; the
renormalized state keeps everything needed inside double range, and an exp
overflow in a coefficient (never in the solution) is reported as such.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

from .expressions import (
    CoeffExpr,
    EquationSpec,
    InvalidEquationError,
    PolyLeaf,
    Polynomial,
    Sum,
    compile_complex,
    differentiate,
    evaluate,
    is_polynomial,
    is_zero_expr,
    logpolar_sum,
    product,
    scale,
    summation,
)
from .growth import GrowthProfile, ProfileEntry

__all__ = [
    "IntegratorConfig",
    "RaySample",
    "integrate_ray",
    "TransformedEquation",
    "liouville_transform",
    "residual_check",
    "conversion_factor_profile",
    "DecayReport",
    "check_decay_on_ray",
    "solution_growth_profile",
    "RayIntegrationError",
    "CoefficientOverflowError",
    "QuadratureError",
]

_TWO_PI = 2.0 * math.pi


class RayIntegrationError(RuntimeError):
    """Integration could not continue; carries the last good abscissa."""

    def __init__(self, message: str, last_good_t: float | None = None):
        super().__init__(message)
        self.last_good_t = last_good_t


class CoefficientOverflowError(RayIntegrationError):
    """A coefficient left double range in the non-log channel."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature of the conversion exponent did not converge."""


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_floor: float = 1e-12
    max_step: float = math.inf
    rescale_threshold: float = 200.0
    max_steps: int = 5_000_000

    def __post_init__(self):
        if not 0 < self.rel_tol <= 1e-4:
            raise ValueError(f"rel_tol must lie in (0, 1e-4], got {self.rel_tol}")
        if self.abs_floor < 0:
            raise ValueError("abs_floor must be >= 0")
        if self.max_step <= 0:
            raise ValueError("max_step must be positive")
        if self.rescale_threshold < 10:
            raise ValueError("rescale_threshold must be >= 10")
        if self.max_steps < 1000:
            raise ValueError("max_steps must be >= 1000")


@dataclass(frozen=True)
class RaySample:
    t: float
    log_abs_f: float
    phase_f: float
    log_abs_fprime: float
    phase_fprime: float
    accumulated_rescale: float


def _log_abs(w: complex) -> float:
    a = abs(w)
    return math.log(a) if a > 0 else -math.inf


# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 0.2, 0.3, 0.8, 8.0 / 9.0
_A21 = 0.2
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

# PI controller constants (the classic DOPRI5 pairing)
_ALPHA, _BETA = 0.17, 0.04
_SAFETY, _FAC_MIN, _FAC_MAX = 0.9, 0.2, 10.0


def _ray_steps(spec, theta, t0, t1, init, config, checkpoints):
    """Generator yielding (t, f, g, rescale) at t0, each accepted step, and t1.

    Checkpoints (sorted, inside (t0, t1)) are hit exactly by clipping steps.
    g is df/dz, not df/dt.  The yielded f, g are renormalized; true values
    carry the extra factor e^{rescale}.
    """
    a_fun = compile_complex(spec.A)
    b_fun = compile_complex(spec.B)
    h_fun = None if spec.H is None else compile_complex(spec.H)
    eith = cmath.exp(1j * theta)
    rtol, afloor = config.rel_tol, config.abs_floor
    thresh = config.rescale_threshold

    f, g = complex(init[0]), complex(init[1])
    t = t0
    rescale = 0.0
    hscale = 1.0  # e^{-rescale}, multiplies the forcing term

    targets = list(checkpoints) + [t1]
    ti = 0

    def rhs(tt, ff, gg):
        zz = tt * eith
        if h_fun is None:
            return eith * gg, eith * (-a_fun(zz) * gg - b_fun(zz) * ff)
        return eith * gg, eith * (h_fun(zz) * hscale - a_fun(zz) * gg - b_fun(zz) * ff)

    yield t, f, g, rescale

    h = min(config.max_step, 1e-3 * (t1 - t0))
    h_floor = 1e-14 * (t1 - t0)
    err_prev = 1e-4
    k1f = k1g = None
    attempts = 0

    while t < t1:
        attempts += 1
        if attempts > config.max_steps:
            raise RayIntegrationError(
                f"step budget of {config.max_steps} exhausted at t = {t:.6g} "
                f"(ray theta = {theta:.6g}); a stiffness wall in the "
                f"coefficients is pinning the step size",
                last_good_t=t,
            )
        target = targets[ti]
        h = min(h, config.max_step, target - t)
        if h < h_floor:
            raise RayIntegrationError(
                f"step size underflow at t = {t:.6g} (ray theta = {theta:.6g})",
                last_good_t=t,
            )
        try:
            if k1f is None:
                k1f, k1g = rhs(t, f, g)
            k2f, k2g = rhs(t + _C2 * h, f + h * _A21 * k1f, g + h * _A21 * k1g)
            k3f, k3g = rhs(
                t + _C3 * h,
                f + h * (_A31 * k1f + _A32 * k2f),
                g + h * (_A31 * k1g + _A32 * k2g),
            )
            k4f, k4g = rhs(
                t + _C4 * h,
                f + h * (_A41 * k1f + _A42 * k2f + _A43 * k3f),
                g + h * (_A41 * k1g + _A42 * k2g + _A43 * k3g),
            )
            k5f, k5g = rhs(
                t + _C5 * h,
                f + h * (_A51 * k1f + _A52 * k2f + _A53 * k3f + _A54 * k4f),
                g + h * (_A51 * k1g + _A52 * k2g + _A53 * k3g + _A54 * k4g),
            )
            k6f, k6g = rhs(
                t + h,
                f + h * (_A61 * k1f + _A62 * k2f + _A63 * k3f + _A64 * k4f + _A65 * k5f),
                g + h * (_A61 * k1g + _A62 * k2g + _A63 * k3g + _A64 * k4g + _A65 * k5g),
            )
            fn = f + h * (_B1 * k1f + _B3 * k3f + _B4 * k4f + _B5 * k5f + _B6 * k6f)
            gn = g + h * (_B1 * k1g + _B3 * k3g + _B4 * k4g + _B5 * k5g + _B6 * k6g)
            k7f, k7g = rhs(t + h, fn, gn)
        except OverflowError as exc:
            raise CoefficientOverflowError(
                f"coefficient evaluation overflowed near t = {t:.6g} on ray "
                f"theta = {theta:.6g}; magnitudes there exceed double range",
                last_good_t=t,
            ) from exc

        ef = h * (_E1 * k1f + _E3 * k3f + _E4 * k4f + _E5 * k5f + _E6 * k6f + _E7 * k7f)
        eg = h * (_E1 * k1g + _E3 * k3g + _E4 * k4g + _E5 * k5g + _E6 * k6g + _E7 * k7g)
        sf = afloor + rtol * max(abs(f), abs(fn))
        sg = afloor + rtol * max(abs(g), abs(gn))
        err = math.sqrt(0.5 * ((abs(ef) / sf) ** 2 + (abs(eg) / sg) ** 2))

        if err <= 1.0 or not math.isfinite(err):
            if not math.isfinite(err):
                # poisoned stage (inf/nan): treat as a hard rejection
                h *= _FAC_MIN
                k1f = None
                continue
            t_new = t + h
            hit = t_new >= target - 1e-15 * max(1.0, abs(target))
            t = target if hit else t_new
            if hit and ti < len(targets) - 1:
                ti += 1
            f, g = fn, gn
            k1f, k1g = k7f, k7g  # FSAL
            m = max(abs(f), abs(g))
            if m > 0 and abs(math.log(m)) > thresh:
                s = math.log(m)
                sc = math.exp(-s)
                f *= sc
                g *= sc
                rescale += s
                try:
                    hscale = math.exp(-rescale) if h_fun is not None else 1.0
                except OverflowError:
                    raise RayIntegrationError(
                        f"forcing term scale e^{-rescale:.3g} left double range "
                        f"at t = {t:.6g}",
                        last_good_t=t,
                    ) from None
                k1f = None  # stale after rescaling
            yield t, f, g, rescale
            if err == 0.0:
                fac = _FAC_MAX
            else:
                fac = _SAFETY * err ** (-_ALPHA) * err_prev**_BETA
                fac = min(_FAC_MAX, max(_FAC_MIN, fac))
            err_prev = max(err, 1e-4)
            h *= fac
        else:
            # rejected; k1 stays valid since (t, f, g) did not move
            fac = _SAFETY * err ** (-_ALPHA)
            h *= min(1.0, max(_FAC_MIN, fac))


def _validate_ray_args(theta, t0, t1, init):
    if not math.isfinite(theta):
        raise ValueError("theta must be finite")
    if not (math.isfinite(t0) and math.isfinite(t1)) or t0 < 0 or t1 <= t0:
        raise ValueError(f"need 0 <= t0 < t1 finite, got ({t0}, {t1})")
    if len(init) != 2:
        raise ValueError("init must be a pair (f(t0), f'(t0))")
    if complex(init[0]) == 0 and complex(init[1]) == 0:
        raise ValueError("init must be a non-trivial pair")


def _sample(t, f, g, rescale) -> RaySample:
    return RaySample(
        t=t,
        log_abs_f=_log_abs(f) + rescale,
        phase_f=cmath.phase(f),
        log_abs_fprime=_log_abs(g) + rescale,
        phase_fprime=cmath.phase(g),
        accumulated_rescale=rescale,
    )


def integrate_ray(
    spec: EquationSpec,
    theta: float,
    t0: float,
    t1: float,
    init=(1 + 0j, 0j),
    config: IntegratorConfig | None = None,
    checkpoints=None,
) -> list[RaySample]:
    """Integrate along z = t e^{i theta}, t in [t0, t1]; samples at every
    accepted step, with any checkpoints in (t0, t1) hit exactly.

    init is (f(t0 e^{i theta}), f'(t0 e^{i theta})) with f' the z-derivative;
    the canonical bases are (1, 0) and (0, 1).  Output is deterministic:
    the step sequence depends only on the arguments.
    """
    _validate_ray_args(theta, t0, t1, init)
    config = config or IntegratorConfig()
    cps = sorted({float(c) for c in (checkpoints or ()) if t0 < c < t1})
    return [
        _sample(*state)
        for state in _ray_steps(spec, theta, t0, t1, init, config, cps)
    ]


# ---------------------------------------------------------------------------
# Liouville transform


@dataclass(frozen=True)
class TransformedEquation:
    """y'' + V y = 0 with f = y * exp(-(1/2) int_0^z A); V = B - A^2/4 - A'/2."""

    potential: CoeffExpr
    conversion_exponent: str
    original: EquationSpec

    def transformed_spec(self) -> EquationSpec:
        if is_zero_expr(self.potential):
            raise InvalidEquationError(
                "transformed potential is identically zero; y'' = 0 needs no integrator"
            )
        return EquationSpec(
            name=f"{self.original.name}-transformed",
            A=PolyLeaf(Polynomial.zero()),
            B=self.potential,
        )


def liouville_transform(spec: EquationSpec) -> TransformedEquation:
    """Remove the first-order term of a homogeneous equation."""
    if not spec.homogeneous:
        raise InvalidEquationError(
            "the Liouville substitution applies to the homogeneous equation"
        )
    A = spec.A
    potential = summation(
        [spec.B, scale(-0.25, product([A, A])), scale(-0.5, differentiate(A))]
    )
    return TransformedEquation(
        potential=potential,
        conversion_exponent=f"exp(-(1/2) * int_0^z ({A}) dz)",
        original=spec,
    )


# ---------------------------------------------------------------------------
# residuals


def _logaddexp_all(xs) -> float:
    m = max(xs)
    if m == -math.inf:
        return -math.inf
    return m + math.log(math.fsum(math.exp(x - m) for x in xs))


def residual_check(candidate: CoeffExpr, spec: EquationSpec, points) -> float:
    """Worst relative residual of a closed-form candidate over the points.

    Relative means |f'' + A f' + B f - H| / (1 + |f''| + |A f'| + |B f|),
    computed entirely in the log domain.
    """
    f1 = differentiate(candidate)
    f2 = differentiate(f1)
    worst = 0.0
    for z in points:
        z = complex(z)
        t2 = evaluate(f2, z)
        t1 = evaluate(spec.A, z) * evaluate(f1, z)
        t0 = evaluate(spec.B, z) * evaluate(candidate, z)
        terms = [t2, t1, t0]
        if spec.H is not None:
            terms.append(-evaluate(spec.H, z))
        num = logpolar_sum(terms)
        if num.is_zero:
            continue
        den = _logaddexp_all(
            [0.0, t2.log_magnitude, t1.log_magnitude, t0.log_magnitude]
        )
        worst = max(worst, math.exp(num.log_magnitude - den))
    return worst


# ---------------------------------------------------------------------------
# conversion factor along a ray


def conversion_factor_profile(
    spec: EquationSpec, theta: float, radii, rel_tol: float = 1e-8
) -> list[tuple[float, float]]:
    """log |exp(-(1/2) int_0^{r e^{i theta}} A dz)| at each radius.

    The line integral is accumulated segment by segment with adaptive
    Gauss-Kronrod quadrature; radii must be increasing.
    """
    from scipy import integrate as spi

    rs = [float(r) for r in radii]
    if any(b <= a for a, b in zip(rs, rs[1:])) or (rs and rs[0] < 0):
        raise ValueError("radii must be nonnegative and strictly increasing")
    a_fun = compile_complex(spec.A)
    eith = cmath.exp(1j * theta)

    out = []
    acc = 0j
    prev = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", spi.IntegrationWarning)
        for r in rs:
            if r > prev:
                try:
                    re_val, re_err = spi.quad(
                        lambda t: (a_fun(t * eith)).real,
                        prev, r, epsabs=1e-12, epsrel=rel_tol, limit=200,
                    )
                    im_val, im_err = spi.quad(
                        lambda t: (a_fun(t * eith)).imag,
                        prev, r, epsabs=1e-12, epsrel=rel_tol, limit=200,
                    )
                except spi.IntegrationWarning as exc:
                    raise QuadratureError(
                        f"line integral of A failed to converge on [{prev}, {r}] "
                        f"along theta = {theta:.6g}: {exc}"
                    ) from exc
                acc += eith * complex(re_val, im_val)
                prev = r
            out.append((r, -0.5 * acc.real))
    return out


# ---------------------------------------------------------------------------
# decay probe


@dataclass(frozen=True)
class DecayReport:
    theta: float
    head_window: tuple[float, float]
    tail_window: tuple[float, float]
    head_log_envelope: float
    tail_log_envelope: float
    envelope_ratio: float
    nonpoly_log_sup_tail: float | None


def _window_envelope(spec, theta, t0, t1, init, config, windows):
    """Max log|y| per window, over one basis solution."""
    cps = sorted({w for win in windows for w in win if t0 < w < t1})
    best = [-math.inf] * len(windows)
    for t, f, g, rescale in _ray_steps(spec, theta, t0, t1, init, config, cps):
        la = _log_abs(f) + rescale
        for i, (w0, w1) in enumerate(windows):
            if w0 <= t <= w1 and la > best[i]:
                best[i] = la
    return best


def check_decay_on_ray(
    potential: CoeffExpr,
    theta: float,
    t0: float,
    t1: float,
    head_window: tuple[float, float] | None = None,
    tail_window: tuple[float, float] | None = None,
    config: IntegratorConfig | None = None,
) -> DecayReport:
    """Integrate y'' + V y = 0 for both canonical bases and compare envelopes.

    The envelope of a window is the max of log|y| over accepted-step samples
    inside it, across both basis solutions.  Decay of the oscillation
    amplitude shows up as envelope_ratio < 1.  The report also carries the
    sup of the non-polynomial part of the potential over the tail window,
    which is the quantity that must die for a ray to be decay-admissible.
    """
    config = config or IntegratorConfig()
    span = t1 - t0
    head = head_window or (t0, t0 + 0.1 * span)
    tail = tail_window or (t1 - 0.1 * span, t1)
    if not (t0 <= head[0] < head[1] <= t1 and t0 <= tail[0] < tail[1] <= t1):
        raise ValueError("windows must lie inside [t0, t1]")
    spec = EquationSpec("decay-probe", PolyLeaf(Polynomial.zero()), potential)
    windows = [tuple(head), tuple(tail)]
    h_best = [-math.inf, -math.inf]
    for init in ((1 + 0j, 0j), (0j, 1 + 0j)):
        got = _window_envelope(spec, theta, t0, t1, init, config, windows)
        h_best = [max(a, b) for a, b in zip(h_best, got)]
    head_env, tail_env = h_best

    nonpoly = _nonpolynomial_part(potential)
    sup = None
    if nonpoly is not None:
        eith = cmath.exp(1j * theta)
        ts = [tail[0] + k * (tail[1] - tail[0]) / 64 for k in range(65)]
        sup = max(evaluate(nonpoly, t * eith).log_magnitude for t in ts)

    diff = tail_env - head_env
    ratio = math.inf if diff > 700 else math.exp(diff)
    return DecayReport(
        theta=theta,
        head_window=tuple(head),
        tail_window=tuple(tail),
        head_log_envelope=head_env,
        tail_log_envelope=tail_env,
        envelope_ratio=ratio,
        nonpoly_log_sup_tail=sup,
    )


def _nonpolynomial_part(expr: CoeffExpr) -> CoeffExpr | None:
    if is_polynomial(expr):
        return None
    if isinstance(expr, Sum):
        rest = [t for t in expr.terms if not is_polynomial(t)]
        return summation(rest)
    return expr


# ---------------------------------------------------------------------------
# solution growth profile (ray fan)


def solution_growth_profile(
    spec: EquationSpec,
    radii,
    angular_samples: int = 64,
    init=(1 + 0j, 1 + 0j),
    config: IntegratorConfig | None = None,
    t0: float = 0.0,
) -> GrowthProfile:
    """Sampled log M(r, f) for the solution with f(0), f'(0) = init.

    One integration per ray; the same initial pair on every ray means every
    ray sees the same entire solution.  The minimum channel is the sampled
    minimum over the ray fan, not a true min-modulus.
    """
    config = config or IntegratorConfig()
    rs = [float(r) for r in radii]
    if not rs or any(b <= a for a, b in zip(rs, rs[1:])) or rs[0] <= t0:
        raise ValueError("radii must be strictly increasing and exceed t0")
    n = int(angular_samples)
    if n < 8:
        raise ValueError("need at least 8 rays")
    r_index = {r: k for k, r in enumerate(rs)}
    log_by_ray = []
    for j in range(n):
        theta = _TWO_PI * j / n
        row = [None] * len(rs)
        for t, f, g, rescale in _ray_steps(
            spec, theta, t0, rs[-1], init, config, rs[:-1]
        ):
            k = r_index.get(t)
            if k is not None:
                row[k] = _log_abs(f) + rescale
        log_by_ray.append(row)
    entries = []
    for k, r in enumerate(rs):
        col = [log_by_ray[j][k] for j in range(n)]
        jmax = max(range(n), key=col.__getitem__)
        entries.append(
            ProfileEntry(
                r=r,
                log_max_modulus=col[jmax],
                log_min_modulus=min(col),
                argmax_theta=_TWO_PI * jmax / n,
            )
        )
    return GrowthProfile(tuple(entries), label=f"solution of {spec.name}")
