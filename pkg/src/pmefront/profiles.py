"""Closed-form reference solutions used as oracles.

Barenblatt self-similar source solutions of rho_t = lap(rho^m) in d
dimensions,

    rho(x, t) = t^(-a) * ( C - k |x|^2 t^(-2b) )_+ ^ (1/(m-1)),
    a = d / (d(m-1) + 2),   b = a/d,   k = a(m-1)/(2md),

and the one-dimensional quadratic waiting-time pressure for m = 2,

    u(x, t) = A(t) * (x_+)^2,   A(t) = A0 / (1 - 6 A0 t),

whose free boundary stays pinned at x = 0 for all t < 1/(6 A0).  Both are
exercised by residual tests before anything else trusts them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "Barenblatt",
    "waiting_time_pressure",
    "waiting_time_coefficient",
]


@dataclass(frozen=True)
class Barenblatt:
    """Source solution of the drift-free porous medium equation."""

    m: float
    d: int
    C: float

    def __post_init__(self) -> None:
        if self.m <= 1.0:
            raise ValueError("m must exceed 1")
        if self.d not in (1, 2):
            raise ValueError("d must be 1 or 2")
        if self.C <= 0.0:
            raise ValueError("C must be positive")

    @property
    def alpha(self) -> float:
        return self.d / (self.d * (self.m - 1.0) + 2.0)

    @property
    def beta(self) -> float:
        return self.alpha / self.d

    @property
    def k(self) -> float:
        return self.alpha * (self.m - 1.0) / (2.0 * self.m * self.d)

    def density(self, points: NDArray[np.float64], t: float) -> NDArray[np.float64]:
        r2 = _sqdist(points, self.d)
        core = self.C - self.k * r2 * t ** (-2.0 * self.beta)
        return t ** (-self.alpha) * np.maximum(core, 0.0) ** (1.0 / (self.m - 1.0))

    def pressure(self, points: NDArray[np.float64], t: float) -> NDArray[np.float64]:
        rho = self.density(points, t)
        return self.m / (self.m - 1.0) * rho ** (self.m - 1.0)

    def support_radius(self, t: float) -> float:
        return math.sqrt(self.C / self.k) * t ** self.beta

    def front_speed(self, t: float) -> float:
        return self.beta * self.support_radius(t) / t

    def pressure_laplacian(self, t: float) -> float:
        """Value of lap(u) inside the support (spatially constant)."""
        # u = m/(m-1) t^(-a(m-1)) (C - k r^2 t^(-2b)) on the support, so
        # lap u = -m/(m-1) * k * 2d * t^(-a(m-1)-2b); the exponent is -1
        # because a(m-1) + 2b = 1 by the self-similarity relations.
        return -self.m / (self.m - 1.0) * self.k * 2.0 * self.d / t

    def mass(self) -> float:
        """Total integral of the density (time invariant)."""
        p = 1.0 / (self.m - 1.0)
        r_max = math.sqrt(self.C / self.k)
        if self.d == 1:
            xs = np.linspace(-r_max, r_max, 20001)
            vals = np.maximum(self.C - self.k * xs * xs, 0.0) ** p
            return float(np.trapezoid(vals, xs))
        rs = np.linspace(0.0, r_max, 20001)
        vals = np.maximum(self.C - self.k * rs * rs, 0.0) ** p * 2.0 * np.pi * rs
        return float(np.trapezoid(vals, rs))


def _sqdist(points: NDArray[np.float64], d: int) -> NDArray[np.float64]:
    pts = np.asarray(points, dtype=np.float64)
    if d == 1:
        return pts.reshape(-1) ** 2 if pts.ndim <= 1 else pts[..., 0] ** 2
    if pts.shape[-1] != 2:
        raise ValueError("2-D profile needs points with 2 coordinates")
    return pts[..., 0] ** 2 + pts[..., 1] ** 2


def waiting_time_coefficient(t: float, A0: float) -> float:
    """A(t) = A0/(1 - 6 A0 t); valid while t < 1/(6 A0)."""
    if t >= 1.0 / (6.0 * A0):
        raise ValueError("waiting-time profile blows up at t = 1/(6 A0)")
    return A0 / (1.0 - 6.0 * A0 * t)


def waiting_time_pressure(
    x: NDArray[np.float64], t: float, A0: float = 1.0
) -> NDArray[np.float64]:
    """Quadratic waiting-time pressure (m = 2 only): u = A(t) (x_+)^2.

    Satisfies u_t = u*u_xx + |u_x|^2 exactly: both sides equal
    6 A(t)^2 x_+^2.  The contact point x = 0 does not move.
    """
    A = waiting_time_coefficient(t, A0)
    xp = np.maximum(np.asarray(x, dtype=np.float64), 0.0)
    return A * xp * xp
