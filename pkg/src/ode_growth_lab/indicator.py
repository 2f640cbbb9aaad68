"""Angular growth indicator of e^{P(z)} and the critical-ray geometry.

For a polynomial P with leading term c z^n, c = alpha + i beta, the growth of
|e^{P(r e^{i theta})}| is governed by

    delta(P, theta) = alpha cos(n theta) - beta sin(n theta) = Re(c e^{i n theta}),

positive where the factor blows up and negative where it dies.  The 2n zeros

    theta_k = (pi/2 - arg c + k pi) / n

split the circle into 2n alternating sectors.  Separately, a polynomial
coefficient Q of degree m induces m+2 equally spaced critical rays

    theta_j = (-arg a_m + 2 j pi) / (m + 2),    j = 0 .. m+1,

the directions along which solutions of f'' + Q f = 0 can decay.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .expressions import Polynomial

__all__ = [
    "Sector",
    "SectorDecomposition",
    "delta",
    "critical_rays_exp",
    "critical_rays_poly",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Sector:
    """Open angular sector (theta_low, theta_high) with the sign of delta inside.

    theta_low lies in [0, 2*pi); the final sector of a decomposition wraps
    past 2*pi so that exactly 2n sectors cover the circle.
    """

    theta_low: float
    theta_high: float
    sign: int

    def __post_init__(self):
        if not self.theta_low < self.theta_high:
            raise ValueError("sector needs theta_low < theta_high")
        if self.sign not in (-1, 1):
            raise ValueError("sector sign must be -1 or +1")

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.theta_low + self.theta_high)

    def contains(self, theta: float) -> bool:
        t = theta % _TWO_PI
        if self.theta_low < t < self.theta_high:
            return True
        # wrapped representative
        return self.theta_low < t + _TWO_PI < self.theta_high


@dataclass(frozen=True)
class SectorDecomposition:
    degree: int
    rays: tuple[float, ...]
    sectors: tuple[Sector, ...]


def _require_nonconstant(p: Polynomial, what: str) -> Polynomial:
    if p.degree < 1:
        raise ValueError(f"{what} must have degree >= 1, got degree {p.degree}")
    return p


def delta(P: Polynomial, theta: float) -> float:
    """Indicator Re(c e^{i n theta}) for the leading term c z^n of P."""
    _require_nonconstant(P, "P")
    c = P.leading
    n = P.degree
    return (c * cmath.exp(1j * n * theta)).real


def critical_rays_exp(P: Polynomial) -> SectorDecomposition:
    """Zeros of delta(P, .) in [0, 2*pi) and the signed sectors between them."""
    _require_nonconstant(P, "P")
    n = P.degree
    phi = cmath.phase(P.leading)
    rays = sorted(((math.pi / 2 - phi + k * math.pi) / n) % _TWO_PI for k in range(2 * n))
    sectors = []
    for k in range(2 * n):
        low = rays[k]
        high = rays[k + 1] if k + 1 < 2 * n else rays[0] + _TWO_PI
        mid = 0.5 * (low + high)
        sign = 1 if delta(P, mid) > 0 else -1
        sectors.append(Sector(low, high, sign))
    return SectorDecomposition(n, tuple(rays), tuple(sectors))


def critical_rays_poly(Q: Polynomial) -> tuple[float, ...]:
    """The m+2 possible decay directions for f'' + Q f = 0, Q of degree m >= 1."""
    _require_nonconstant(Q, "Q")
    m = Q.degree
    phi = cmath.phase(Q.leading)
    return tuple(sorted(((-phi + 2 * j * math.pi) / (m + 2)) % _TWO_PI for j in range(m + 2)))
