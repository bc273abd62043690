"""Uniform rectangular grids and the scalar/vector fields that live on them.

Everything downstream (the solver, the free-boundary trackers, the estimate
verifiers) works with cell-centered values on a uniform grid in d = 1 or 2.
This module owns the grid geometry, the density/pressure transform

    u = m/(m-1) * rho**(m-1),        rho = ((m-1)/m * u)**(1/(m-1)),

second-order difference stencils (central in the interior, one-sided at the
box edge), a renormalized mollifier, and positivity-set extraction with a
sub-cell contour.

Sign and indexing conventions: values arrays are indexed ``[i]`` in 1-D and
``[i, j]`` in 2-D with axis 0 = x, axis 1 = y; flattening is row-major, so
CSV writers iterate x in the outer loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import ndimage

__all__ = [
    "GridSpec",
    "Field",
    "VectorField",
    "pressure_from_density",
    "density_from_pressure",
    "discrete_laplacian",
    "discrete_gradient",
    "mollify",
    "positivity_set",
    "sample_linear",
    "interior_mask",
]

#: Cells within this many cells of the box edge are "boundary influenced":
#: verifier statistics exclude them because every estimate checked here is
#: an interior estimate.
BOUNDARY_COLLAR = 2

#: Default relative threshold defining the discrete positivity set
#: {u > threshold_rel * max(u)}.  Relative, so it is invariant under the
#: scaling u -> c*u and robust to round-off in near-vacuum cells.
DEFAULT_THRESHOLD_REL = 1e-8


@dataclass(frozen=True)
class GridSpec:
    """Uniform cell-centered grid over a rectangular box, d in {1, 2}.

    ``bounds[a] = (lo, hi)`` and ``cells[a]`` give axis *a* a uniform
    spacing ``dx[a] = (hi - lo)/cells[a]``; cell centers sit at
    ``lo + (i + 1/2)*dx``.
    """

    bounds: tuple[tuple[float, float], ...]
    cells: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.bounds) not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {len(self.bounds)}")
        if len(self.cells) != len(self.bounds):
            raise ValueError("bounds and cells must have equal length")
        for (lo, hi), n in zip(self.bounds, self.cells):
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"bounds must be finite and ordered, got ({lo}, {hi})")
            if n < 8:
                raise ValueError(f"need at least 8 cells per axis, got {n}")

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.cells

    @property
    def dx(self) -> tuple[float, ...]:
        return tuple((hi - lo) / n for (lo, hi), n in zip(self.bounds, self.cells))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.dx))

    def axis_centers(self, axis: int) -> NDArray[np.float64]:
        lo, hi = self.bounds[axis]
        n = self.cells[axis]
        h = (hi - lo) / n
        return lo + (np.arange(n) + 0.5) * h

    def centers(self) -> tuple[NDArray[np.float64], ...]:
        """Cell-center coordinate arrays, meshgrid'ed with ``indexing='ij'``."""
        axes = [self.axis_centers(a) for a in range(self.dim)]
        if self.dim == 1:
            return (axes[0],)
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def contains(self, point: Sequence[float]) -> bool:
        return all(lo <= p <= hi for p, (lo, hi) in zip(point, self.bounds))


@dataclass
class Field:
    """Scalar grid function: one float64 per cell.

    ``role`` tags the physical meaning; density and pressure fields must be
    non-negative, which is validated on construction with the offending cell
    reported.  ``boundary_influenced`` optionally marks cells whose value was
    produced by a one-sided (edge) stencil.
    """

    grid: GridSpec
    values: NDArray[np.float64]
    role: str = "scalar"
    boundary_influenced: NDArray[np.bool_] | None = None

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} != grid shape {self.grid.shape}"
            )
        if self.role not in ("density", "pressure", "scalar"):
            raise ValueError(f"unknown role {self.role!r}")
        if not np.all(np.isfinite(self.values)):
            bad = np.argwhere(~np.isfinite(self.values))[0]
            raise ValueError(f"non-finite value at cell {tuple(int(b) for b in bad)}")
        if self.role in ("density", "pressure") and np.any(self.values < 0.0):
            bad = np.argwhere(self.values < 0.0)[0]
            idx = tuple(int(b) for b in bad)
            raise ValueError(
                f"negative {self.role} {self.values[idx]:.3e} at cell {idx}"
            )

    def with_values(self, values: NDArray[np.float64], role: str | None = None) -> "Field":
        return Field(self.grid, values, role if role is not None else self.role)

    def copy(self) -> "Field":
        return replace(self, values=self.values.copy())


@dataclass
class VectorField:
    """One float64 component per axis per cell (velocity units)."""

    grid: GridSpec
    components: tuple[NDArray[np.float64], ...]

    def __post_init__(self) -> None:
        if len(self.components) != self.grid.dim:
            raise ValueError("need one component per axis")
        comps = []
        for c in self.components:
            c = np.asarray(c, dtype=np.float64)
            if c.shape != self.grid.shape:
                raise ValueError("component shape mismatch")
            if not np.all(np.isfinite(c)):
                raise ValueError("non-finite vector component")
            comps.append(c)
        self.components = tuple(comps)

    def magnitude(self) -> NDArray[np.float64]:
        return np.sqrt(sum(c * c for c in self.components))


# ---------------------------------------------------------------------------
# pressure <-> density


def pressure_from_density(rho: Field, m: float) -> Field:
    """u = m/(m-1) * rho**(m-1)."""
    if m <= 1.0:
        raise ValueError(f"m must exceed 1, got {m}")
    if np.any(rho.values < 0.0):
        bad = tuple(int(b) for b in np.argwhere(rho.values < 0.0)[0])
        raise ValueError(f"negative density at cell {bad}")
    u = (m / (m - 1.0)) * rho.values ** (m - 1.0)
    return Field(rho.grid, u, role="pressure")


def density_from_pressure(u: Field, m: float) -> Field:
    """rho = ((m-1)/m * u)**(1/(m-1)); inverse of :func:`pressure_from_density`."""
    if m <= 1.0:
        raise ValueError(f"m must exceed 1, got {m}")
    if np.any(u.values < 0.0):
        bad = tuple(int(b) for b in np.argwhere(u.values < 0.0)[0])
        raise ValueError(f"negative pressure at cell {bad}")
    rho = ((m - 1.0) / m * u.values) ** (1.0 / (m - 1.0))
    return Field(u.grid, rho, role="density")


# ---------------------------------------------------------------------------
# difference stencils


def _second_derivative_1d(f: NDArray[np.float64], h: float, axis: int) -> NDArray[np.float64]:
    f = np.moveaxis(f, axis, 0)
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (h * h)
    # One-sided second-order second derivative (4-point).
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h)
    out[-1] = (2.0 * f[-1] - 5.0 * f[-2] + 4.0 * f[-3] - f[-4]) / (h * h)
    return np.moveaxis(out, 0, axis)


def _first_derivative_1d(f: NDArray[np.float64], h: float, axis: int) -> NDArray[np.float64]:
    f = np.moveaxis(f, axis, 0)
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    # One-sided second-order first derivative (3-point).
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
    out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h)
    return np.moveaxis(out, 0, axis)


def _edge_mask(grid: GridSpec, width: int) -> NDArray[np.bool_]:
    mask = np.zeros(grid.shape, dtype=bool)
    for a in range(grid.dim):
        sl = [slice(None)] * grid.dim
        sl[a] = slice(0, width)
        mask[tuple(sl)] = True
        sl[a] = slice(-width, None)
        mask[tuple(sl)] = True
    return mask


def interior_mask(grid: GridSpec, collar: int = BOUNDARY_COLLAR) -> NDArray[np.bool_]:
    """True away from the box edge (one-sided stencils and mollifier bleed
    contaminate a collar of ``collar`` cells, excluded from all statistics)."""
    return ~_edge_mask(grid, collar)


def discrete_laplacian(f: Field) -> Field:
    """(2d+1)-point Laplacian, second order; one-sided at the box edge.

    Edge cells are flagged in ``boundary_influenced`` on the result.
    """
    out = np.zeros_like(f.values)
    for a in range(f.grid.dim):
        out += _second_derivative_1d(f.values, f.grid.dx[a], axis=a)
    return Field(f.grid, out, role="scalar",
                 boundary_influenced=_edge_mask(f.grid, 1))


def discrete_gradient(f: Field) -> VectorField:
    """Central differences in the interior, one-sided second order at the edge."""
    comps = tuple(
        _first_derivative_1d(f.values, f.grid.dx[a], axis=a)
        for a in range(f.grid.dim)
    )
    return VectorField(f.grid, comps)


# ---------------------------------------------------------------------------
# mollifier


def _ball_kernel(grid: GridSpec, radius: float) -> NDArray[np.float64]:
    reach = [int(math.floor(radius / h)) for h in grid.dx]
    axes = [np.arange(-r, r + 1) * h for r, h in zip(reach, grid.dx)]
    if grid.dim == 1:
        dist2 = axes[0] ** 2
    else:
        gx, gy = np.meshgrid(*axes, indexing="ij")
        dist2 = gx * gx + gy * gy
    return (dist2 <= radius * radius + 1e-12).astype(np.float64)


def mollify(f: Field, radius: float) -> Field:
    """Renormalized moving average over the ball of the given physical radius.

    Per-cell renormalization (divide by the convolved indicator) keeps
    constants exact even at the box edge; linearity in ``f`` and interior
    mass preservation follow from the kernel not depending on ``f``.
    """
    if radius < min(f.grid.dx) - 1e-15:
        raise ValueError(f"mollifier radius {radius} below grid spacing {min(f.grid.dx)}")
    w = _ball_kernel(f.grid, radius)
    num = ndimage.convolve(f.values, w, mode="constant", cval=0.0)
    den = ndimage.convolve(np.ones_like(f.values), w, mode="constant", cval=0.0)
    return Field(f.grid, num / den, role=f.role)


# ---------------------------------------------------------------------------
# positivity set + contour


def positivity_set(
    u: Field, threshold_rel: float = DEFAULT_THRESHOLD_REL
) -> tuple[NDArray[np.bool_], list[NDArray[np.float64]]]:
    """Discrete positivity set and its sub-cell boundary.

    Returns ``(mask, contours)`` where ``mask`` selects cells with
    ``u > threshold_rel * max(u)`` and ``contours`` is a list of ordered
    vertex arrays (shape ``(k, dim)``) tracing the level
    ``threshold_rel * max(u)`` by linear interpolation between cell centers.
    An identically-zero field yields an empty mask and no contours.
    """
    peak = float(np.max(u.values))
    if peak <= 0.0:
        return np.zeros(u.grid.shape, dtype=bool), []
    level = threshold_rel * peak
    mask = u.values > level
    if u.grid.dim == 1:
        verts = _crossings_1d(u.grid, u.values, level)
        return mask, [np.array([[v]]) for v in verts]
    return mask, _marching_squares(u.grid, u.values, level)


def _crossings_1d(grid: GridSpec, f: NDArray[np.float64], level: float) -> list[float]:
    x = grid.axis_centers(0)
    g = f - level
    out: list[float] = []
    for i in range(len(g) - 1):
        a, b = g[i], g[i + 1]
        if a == 0.0:
            continue  # counted via the sign change of the neighbor pair
        if (a > 0.0) != (b > 0.0) or (b == 0.0 and a > 0.0):
            t = a / (a - b)
            out.append(float(x[i] + t * (x[i + 1] - x[i])))
    return out


# Marching squares on the cell-center lattice.  Each lattice square has
# corners (i,j), (i+1,j), (i+1,j+1), (i,j+1); the case index sets one bit per
# corner above the level, and each case contributes 0, 1 or 2 segments whose
# endpoints are linear interpolations along square edges.  Saddles (cases 5
# and 10) are disambiguated by the corner average.
_EDGES = {
    # edge id -> (corner a, corner b) in local corner numbering 0..3:
    # 0=(0,0) 1=(1,0) 2=(1,1) 3=(0,1); edges: 0 bottom, 1 right, 2 top, 3 left
    0: (0, 1),
    1: (1, 2),
    2: (3, 2),
    3: (0, 3),
}
_CASE_SEGMENTS: dict[int, tuple[tuple[int, int], ...]] = {
    0: (), 15: (),
    1: ((3, 0),), 14: ((0, 3),),
    2: ((0, 1),), 13: ((1, 0),),
    3: ((3, 1),), 12: ((1, 3),),
    4: ((1, 2),), 11: ((2, 1),),
    6: ((0, 2),), 9: ((2, 0),),
    7: ((3, 2),), 8: ((2, 3),),
    # saddles handled explicitly in the loop
    5: (), 10: (),
}


def _marching_squares(
    grid: GridSpec, f: NDArray[np.float64], level: float
) -> list[NDArray[np.float64]]:
    x = grid.axis_centers(0)
    y = grid.axis_centers(1)
    g = f - level
    nx, ny = g.shape
    above = g > 0.0

    def corner(i: int, j: int, c: int) -> tuple[int, int]:
        di, dj = ((0, 0), (1, 0), (1, 1), (0, 1))[c]
        return i + di, j + dj

    def interp(pa: tuple[int, int], pb: tuple[int, int]) -> tuple[float, float]:
        va, vb = g[pa], g[pb]
        t = va / (va - vb)
        ax, ay = x[pa[0]], y[pa[1]]
        bx, by = x[pb[0]], y[pb[1]]
        return (ax + t * (bx - ax), ay + t * (by - ay))

    # vectorized case index so the python loop only visits crossed squares
    case = (
        above[:-1, :-1].astype(np.int8)
        | (above[1:, :-1] << 1)
        | (above[1:, 1:] << 2)
        | (above[:-1, 1:] << 3)
    )
    active = np.argwhere((case > 0) & (case < 15))

    segments: list[tuple[tuple[float, float], tuple[float, float]]] = []
    for i, j in active:
        idx = int(case[i, j])
        if idx in (5, 10):
            center_above = (
                g[i, j] + g[i + 1, j] + g[i, j + 1] + g[i + 1, j + 1]
            ) > 0.0
            if idx == 5:
                pairs = ((3, 2), (1, 0)) if center_above else ((3, 0), (1, 2))
            else:
                pairs = ((0, 3), (2, 1)) if center_above else ((0, 1), (2, 3))
        else:
            pairs = _CASE_SEGMENTS[idx]
        for ea, eb in pairs:
            ca, cb = _EDGES[ea]
            cc, cd = _EDGES[eb]
            p = interp(corner(i, j, ca), corner(i, j, cb))
            q = interp(corner(i, j, cc), corner(i, j, cd))
            if p != q:
                segments.append((p, q))

    return _chain_segments(segments, tol=1e-9 * max(grid.dx))


def _chain_segments(
    segments: list[tuple[tuple[float, float], tuple[float, float]]], tol: float
) -> list[NDArray[np.float64]]:
    """Join segments that share endpoints into ordered polylines.

    Endpoint matching is by quantized key; traversal order is deterministic
    (segments visited in creation order, ties broken lexicographically).
    """
    if not segments:
        return []

    def key(p: tuple[float, float]) -> tuple[int, int]:
        return (round(p[0] / tol), round(p[1] / tol))

    ends: dict[tuple[int, int], list[int]] = {}
    for n, (p, q) in enumerate(segments):
        ends.setdefault(key(p), []).append(n)
        ends.setdefault(key(q), []).append(n)

    used = [False] * len(segments)
    polylines: list[NDArray[np.float64]] = []

    def other_end(n: int, k: tuple[int, int]) -> tuple[float, float]:
        p, q = segments[n]
        return q if key(p) == k else p

    for start in range(len(segments)):
        if used[start]:
            continue
        used[start] = True
        p, q = segments[start]
        chain = [p, q]
        # extend forward from q, then backward from p
        for head, append in ((q, True), (p, False)):
            k = key(head)
            while True:
                cands = [n for n in ends.get(k, ()) if not used[n]]
                if not cands:
                    break
                n = min(cands)
                used[n] = True
                nxt = other_end(n, k)
                if append:
                    chain.append(nxt)
                else:
                    chain.insert(0, nxt)
                k = key(nxt)
        polylines.append(np.asarray(chain, dtype=np.float64))
    return polylines


# ---------------------------------------------------------------------------
# sampling


def sample_linear(f: Field, points: NDArray[np.float64]) -> NDArray[np.float64]:
    """Multilinear interpolation of cell-center values at arbitrary points.

    Points are clamped to the cell-center hull; shape ``(k, dim)`` (or
    ``(k,)`` in 1-D) in, shape ``(k,)`` out.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.shape[1] != f.grid.dim:
        pts = pts.reshape(-1, f.grid.dim)
    out = np.empty(pts.shape[0])
    axes = [f.grid.axis_centers(a) for a in range(f.grid.dim)]
    idx = []
    frac = []
    for a, ax in enumerate(axes):
        p = np.clip(pts[:, a], ax[0], ax[-1])
        i = np.clip(np.searchsorted(ax, p) - 1, 0, len(ax) - 2)
        idx.append(i)
        frac.append((p - ax[i]) / (ax[i + 1] - ax[i]))
    if f.grid.dim == 1:
        i, t = idx[0], frac[0]
        out = (1 - t) * f.values[i] + t * f.values[i + 1]
    else:
        i, j = idx
        s, t = frac
        v = f.values
        out = (
            (1 - s) * (1 - t) * v[i, j]
            + s * (1 - t) * v[i + 1, j]
            + (1 - s) * t * v[i, j + 1]
            + s * t * v[i + 1, j + 1]
        )
    return out
