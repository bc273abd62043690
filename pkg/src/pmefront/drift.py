"""Analytic drift presets b(x, t).

Each preset evaluates at arbitrary points (the streamline integrator and the
face-flux assembly both sample off-center locations) and, where the formula
admits them, supplies the divergence and Jacobian in closed form.  All
shipped presets are autonomous; the time argument is part of the contract so
a time-dependent preset can be added without touching call sites.

Presets
-------
zero                b = 0
constant            b = (c1[, c2])
laminar-sine        b = (amp*sin(freq*y), 0)                       (2-D shear)
linear-diagonal     b = (a*x[, c*y])
corner-gradient     b = -grad(g(x)g(y)), g(s) = sin(pi s) on (0,1)  (else 0)
corner-formation    b = -(x + |y|, y)
cusp                b = (x*log x - 10*x^(1-delta), 0) for x > clamp, else 0
custom-gradient     b = -grad of a quadratic potential (6 coefficients)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

__all__ = ["DriftSpec"]

# preset -> (allowed dims, number of parameters)
_PRESETS: dict[str, tuple[tuple[int, ...], tuple[int, ...]]] = {
    "zero": ((1, 2), (0,)),
    "constant": ((1, 2), (1, 2)),
    "laminar-sine": ((2,), (2,)),
    "linear-diagonal": ((1, 2), (1, 2)),
    "corner-gradient": ((2,), (0,)),
    "corner-formation": ((2,), (0,)),
    "rotation": ((2,), (0,)),
    "cusp": ((2,), (2,)),
    "custom-gradient": ((2,), (6,)),
}


@dataclass(frozen=True)
class DriftSpec:
    """Named analytic drift field with its parameter list."""

    name: str
    params: tuple[float, ...] = ()
    dim: int = 2
    time_dependent: bool = False

    def __post_init__(self) -> None:
        if self.name not in _PRESETS:
            raise ValueError(f"unknown drift preset {self.name!r}")
        dims, nparams = _PRESETS[self.name]
        if self.dim not in dims:
            raise ValueError(f"preset {self.name!r} not defined in d={self.dim}")
        if len(self.params) not in nparams:
            raise ValueError(
                f"preset {self.name!r} takes {nparams} parameters, got {len(self.params)}"
            )
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))

    # -- evaluation ---------------------------------------------------------

    def __call__(self, points: NDArray[np.float64], t: float = 0.0) -> NDArray[np.float64]:
        """b at the given points; shape (k, dim) in, shape (k, dim) out."""
        pts = _as_points(points, self.dim)
        k = pts.shape[0]
        p = self.params
        name = self.name
        if name == "zero":
            return np.zeros((k, self.dim))
        if name == "constant":
            c = p if len(p) == self.dim else p * self.dim
            return np.broadcast_to(np.asarray(c), (k, self.dim)).copy()
        if name == "laminar-sine":
            amp, freq = p
            out = np.zeros((k, 2))
            out[:, 0] = amp * np.sin(freq * pts[:, 1])
            return out
        if name == "linear-diagonal":
            c = p if len(p) == self.dim else (p[0],) * self.dim
            return pts * np.asarray(c)
        if name == "corner-gradient":
            return _corner_gradient(pts)
        if name == "corner-formation":
            out = np.empty((k, 2))
            out[:, 0] = -(pts[:, 0] + np.abs(pts[:, 1]))
            out[:, 1] = -pts[:, 1]
            return out
        if name == "rotation":
            out = np.empty((k, 2))
            out[:, 0] = -pts[:, 1]
            out[:, 1] = pts[:, 0]
            return out
        if name == "cusp":
            delta, clamp = p
            out = np.zeros((k, 2))
            x = pts[:, 0]
            live = x > clamp
            xl = x[live]
            out[live, 0] = xl * np.log(xl) - 10.0 * xl ** (1.0 - delta)
            return out
        # custom-gradient: potential 0.5*(q11 x^2 + q22 y^2 + 2 q12 xy) + l1 x + l2 y + c
        q11, q22, q12, l1, l2, _ = p
        out = np.empty((k, 2))
        out[:, 0] = -(q11 * pts[:, 0] + q12 * pts[:, 1] + l1)
        out[:, 1] = -(q12 * pts[:, 0] + q22 * pts[:, 1] + l2)
        return out

    def divergence(self, points: NDArray[np.float64], t: float = 0.0) -> NDArray[np.float64]:
        """div b, pointwise (a.e. value where the formula has kinks)."""
        pts = _as_points(points, self.dim)
        k = pts.shape[0]
        p = self.params
        name = self.name
        if name in ("zero", "constant", "laminar-sine", "rotation"):
            return np.zeros(k)
        if name == "linear-diagonal":
            c = p if len(p) == self.dim else (p[0],) * self.dim
            return np.full(k, float(sum(c)))
        if name == "corner-gradient":
            # -lap(g(x)g(y)) = 2 pi^2 g(x)g(y) on the unit square, 0 outside.
            gx = _g(pts[:, 0])
            gy = _g(pts[:, 1])
            return 2.0 * math.pi**2 * gx * gy
        if name == "corner-formation":
            return np.full(k, -2.0)
        if name == "cusp":
            delta, clamp = p
            out = np.zeros(k)
            x = pts[:, 0]
            live = x > clamp
            xl = x[live]
            out[live] = np.log(xl) + 1.0 - 10.0 * (1.0 - delta) * xl ** (-delta)
            return out
        q11, q22, _, _, _, _ = p
        return np.full(k, -(q11 + q22))

    def jacobian(self, points: NDArray[np.float64], t: float = 0.0) -> NDArray[np.float64]:
        """Db with entries Db[i, a, c] = d b_a / d x_c (a.e. at kinks)."""
        pts = _as_points(points, self.dim)
        k = pts.shape[0]
        p = self.params
        name = self.name
        out = np.zeros((k, self.dim, self.dim))
        if name in ("zero", "constant"):
            return out
        if name == "laminar-sine":
            amp, freq = p
            out[:, 0, 1] = amp * freq * np.cos(freq * pts[:, 1])
            return out
        if name == "rotation":
            out[:, 0, 1] = -1.0
            out[:, 1, 0] = 1.0
            return out
        if name == "linear-diagonal":
            c = p if len(p) == self.dim else (p[0],) * self.dim
            for a, ca in enumerate(c):
                out[:, a, a] = ca
            return out
        if name == "corner-formation":
            out[:, 0, 0] = -1.0
            out[:, 0, 1] = -np.sign(pts[:, 1])
            out[:, 1, 1] = -1.0
            return out
        if name == "cusp":
            delta, clamp = p
            x = pts[:, 0]
            live = x > clamp
            xl = x[live]
            out[live, 0, 0] = np.log(xl) + 1.0 - 10.0 * (1.0 - delta) * xl ** (-delta)
            return out
        if name == "custom-gradient":
            q11, q22, q12, _, _, _ = p
            out[:, 0, 0] = -q11
            out[:, 0, 1] = -q12
            out[:, 1, 0] = -q12
            out[:, 1, 1] = -q22
            return out
        # corner-gradient: b1 = -g'(x)g(y), b2 = -g(x)g'(y)
        gx, gy = _g(pts[:, 0]), _g(pts[:, 1])
        dgx, dgy = _dg(pts[:, 0]), _dg(pts[:, 1])
        ddgx, ddgy = -math.pi**2 * gx, -math.pi**2 * gy
        out[:, 0, 0] = -ddgx * gy
        out[:, 0, 1] = -dgx * dgy
        out[:, 1, 0] = -dgx * dgy
        out[:, 1, 1] = -gx * ddgy
        return out

    # -- bounds over a box ---------------------------------------------------

    def sup_norm(self, bounds: tuple[tuple[float, float], ...], t: float = 0.0,
                 samples: int = 512) -> float:
        """sup |b| over the box, by dense sampling (exact for affine presets)."""
        pts = _box_samples(bounds, samples)
        vals = self(pts, t)
        return float(np.max(np.sqrt(np.sum(vals * vals, axis=1)))) if len(pts) else 0.0

    def sup_divergence(self, bounds: tuple[tuple[float, float], ...], t: float = 0.0,
                       samples: int = 512) -> float:
        """sup |div b| over the box, by dense sampling."""
        pts = _box_samples(bounds, samples)
        return float(np.max(np.abs(self.divergence(pts, t)))) if len(pts) else 0.0


def _as_points(points: NDArray[np.float64], dim: int) -> NDArray[np.float64]:
    pts = np.asarray(points, dtype=np.float64)
    if dim == 1:
        return pts.reshape(-1, 1)
    if pts.ndim == 1:
        return pts.reshape(1, dim)
    return pts.reshape(-1, dim)


def _box_samples(bounds: tuple[tuple[float, float], ...], samples: int) -> NDArray[np.float64]:
    if len(bounds) == 1:
        lo, hi = bounds[0]
        return np.linspace(lo, hi, samples).reshape(-1, 1)
    axes = [np.linspace(lo, hi, samples) for lo, hi in bounds]
    gx, gy = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel()])


def _corner_gradient(pts: NDArray[np.float64]) -> NDArray[np.float64]:
    out = np.empty((pts.shape[0], 2))
    out[:, 0] = -_dg(pts[:, 0]) * _g(pts[:, 1])
    out[:, 1] = -_g(pts[:, 0]) * _dg(pts[:, 1])
    return out


def _g(s: NDArray[np.float64]) -> NDArray[np.float64]:
    inside = (s > 0.0) & (s < 1.0)
    return np.where(inside, np.sin(math.pi * s), 0.0)


def _dg(s: NDArray[np.float64]) -> NDArray[np.float64]:
    inside = (s > 0.0) & (s < 1.0)
    return np.where(inside, math.pi * np.cos(math.pi * s), 0.0)
