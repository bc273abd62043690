"""Explicit monotone finite-volume solver for rho_t = lap(rho^m) + div(rho b).

The scheme is forward Euler on the conservative form: central differencing
of grad(rho^m) on faces plus donor-cell upwinding of the rho*b face flux by
the sign of the face-centered drift component.  Under the time-step bound

    dt <= cfl * min( dx^2 / (2 d max(m rho^{m-1})),  dx / max|b| )

with cfl <= 1/2 the update is monotone (each new cell value is
nondecreasing in every old cell value), which is what lets the comparison
harness demand *exact* discrete ordering rather than ordering up to a
mesh-dependent fudge.

The module also provides the epsilon-lift run (strictly positive
approximations with an exponential floor certificate), the weak-form
residual of a trajectory against smooth test functions, and the pointwise
pressure-equation residual used by the gallery certificates.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import ndimage

from pmefront import _stepper
from pmefront.drift import DriftSpec
from pmefront.grids import (
    BOUNDARY_COLLAR,
    DEFAULT_THRESHOLD_REL,
    Field,
    GridSpec,
    discrete_gradient,
    discrete_laplacian,
    interior_mask,
    positivity_set,
    pressure_from_density,
    sample_linear,
)

__all__ = [
    "SolverParams",
    "DirichletTrace",
    "Snapshot",
    "Trajectory",
    "FloorReport",
    "ComparisonReport",
    "TestFunction",
    "admissible_dt",
    "step_density",
    "run",
    "lifted_run",
    "weak_form_residual",
    "check_comparison",
    "pressure_residual",
]

logger = logging.getLogger(__name__)

#: Cells in this collar must stay empty on no-flux sides (3-cell margin so
#: the one-sided stencils never touch live mass).
SUPPORT_MARGIN_CELLS = 3

#: Relative level below which a cell counts as empty for the margin check.
SUPPORT_EMPTY_REL = 1e-13


@dataclass(frozen=True)
class DirichletTrace:
    """Prescribed boundary density: fn(ghost_points, t) -> density values."""

    fn: Callable[[NDArray[np.float64], float], NDArray[np.float64]]

    def __call__(self, points: NDArray[np.float64], t: float) -> NDArray[np.float64]:
        vals = np.asarray(self.fn(points, t), dtype=np.float64)
        if np.any(vals < 0.0) or not np.all(np.isfinite(vals)):
            raise ValueError("Dirichlet trace must be finite and non-negative")
        return vals


@dataclass
class SolverParams:
    """Time-stepping parameters.

    ``boundary`` holds one (lo, hi) pair per axis; each side is "noflux"
    (default), "periodic" (both sides of the axis), or a
    :class:`DirichletTrace`.  ``stride`` > 0 records a snapshot every that
    many steps; 0 picks a stride targeting ``snapshots`` records.
    ``dt_fixed`` > 0 freezes the step (still validated against the CFL
    bound every step) so that paired runs share time grids.
    """

    m: float
    t0: float
    t1: float
    cfl: float = 0.4
    stride: int = 0
    snapshots: int = 80
    lift: float = 0.0
    dt_fixed: float = 0.0
    boundary: tuple | None = None

    def __post_init__(self) -> None:
        if self.m <= 1.0:
            raise ValueError("m must exceed 1")
        if not self.t1 > self.t0:
            raise ValueError("t1 must exceed t0")
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError("cfl must lie in (0, 1]")
        if self.lift < 0.0:
            raise ValueError("lift must be non-negative")

    def sides(self, dim: int) -> tuple[tuple[object, object], ...]:
        if self.boundary is None:
            return tuple(("noflux", "noflux") for _ in range(dim))
        if len(self.boundary) != dim:
            raise ValueError("boundary needs one (lo, hi) pair per axis")
        out = []
        for lo, hi in self.boundary:
            if (lo == "periodic") != (hi == "periodic"):
                raise ValueError("periodic boundaries come in axis pairs")
            for side in (lo, hi):
                if not (side in ("noflux", "periodic") or isinstance(side, DirichletTrace)):
                    raise ValueError(f"unknown boundary side {side!r}")
            out.append((lo, hi))
        return tuple(out)


@dataclass
class FloorReport:
    """Outcome of the lifted-run positivity floor check."""

    passed: bool
    floor_constant: float
    decay_rate: float
    worst_margin: float
    first_violation_time: float | None
    tolerance: float


@dataclass
class ComparisonReport:
    passed: bool
    max_violation: float
    tolerance: float
    first_violation: tuple[tuple[float, ...], float] | None


@dataclass
class Snapshot:
    t: float
    rho: NDArray[np.float64]


class Trajectory:
    """Time-ordered density snapshots with lazy pressure and contours."""

    def __init__(
        self,
        grid: GridSpec,
        params: SolverParams,
        drift: DriftSpec,
        snapshots: Sequence[Snapshot],
        floor_report: FloorReport | None = None,
    ) -> None:
        times = np.array([s.t for s in snapshots])
        if len(times) == 0:
            raise ValueError("trajectory needs at least one snapshot")
        if np.any(np.diff(times) <= 0):
            raise ValueError("snapshot times must increase strictly")
        self.grid = grid
        self.params = params
        self.drift = drift
        self.snapshots = list(snapshots)
        self.times = times
        self.floor_report = floor_report
        self._pressure_cache: dict[int, Field] = {}
        self._contour_cache: dict[tuple[int, float], list] = {}

    def __len__(self) -> int:
        return len(self.snapshots)

    def density(self, i: int) -> Field:
        return Field(self.grid, self.snapshots[i].rho, role="density")

    def pressure(self, i: int) -> Field:
        i = int(i) % len(self.snapshots) if i < 0 else int(i)
        if i not in self._pressure_cache:
            self._pressure_cache[i] = pressure_from_density(self.density(i), self.params.m)
        return self._pressure_cache[i]

    def contour(self, i: int, threshold_rel: float = DEFAULT_THRESHOLD_REL) -> list:
        key = (i, float(threshold_rel))
        if key not in self._contour_cache:
            _, polys = positivity_set(self.pressure(i), threshold_rel)
            self._contour_cache[key] = polys
        return self._contour_cache[key]

    def mass(self, i: int) -> float:
        return float(self.snapshots[i].rho.sum()) * self.grid.cell_volume

    def index_at(self, t: float) -> int:
        """Index of the snapshot closest to t."""
        return int(np.argmin(np.abs(self.times - t)))

    def bracket(self, t: float) -> tuple[int, int, float]:
        """Snapshot pair straddling t with the interpolation weight."""
        if t <= self.times[0]:
            return 0, 0, 0.0
        if t >= self.times[-1]:
            n = len(self.times) - 1
            return n, n, 0.0
        hi = int(np.searchsorted(self.times, t))
        lo = hi - 1
        w = (t - self.times[lo]) / (self.times[hi] - self.times[lo])
        return lo, hi, float(w)

    def sample_pressure(self, points: NDArray[np.float64], t: float) -> NDArray[np.float64]:
        """Pressure at arbitrary points and time: bilinear in space, linear in t."""
        lo, hi, w = self.bracket(t)
        a = sample_linear(self.pressure(lo), points)
        if hi == lo:
            return a
        b = sample_linear(self.pressure(hi), points)
        return (1.0 - w) * a + w * b

    def pressure_time_derivative(self, i: int) -> Field:
        """du/dt at snapshot i: centered in time, one-sided at the ends."""
        ts = self.times
        n = len(ts)
        if n < 2:
            raise ValueError("need at least two snapshots for a time derivative")
        if 0 < i < n - 1:
            va = self.pressure(i - 1).values
            vb = self.pressure(i + 1).values
            dt = ts[i + 1] - ts[i - 1]
        elif i == 0:
            va = self.pressure(0).values
            vb = self.pressure(1).values
            dt = ts[1] - ts[0]
        else:
            va = self.pressure(n - 2).values
            vb = self.pressure(n - 1).values
            dt = ts[n - 1] - ts[n - 2]
        return Field(self.grid, (vb - va) / dt, role="scalar")


# ---------------------------------------------------------------------------
# CFL and face assembly


def admissible_dt(rho: Field, drift: DriftSpec, params: SolverParams, t: float) -> float:
    """cfl * min(dx^2/(2 d max(m rho^{m-1})), dx/max|b|); inf when both idle."""
    g = rho.grid
    h = min(g.dx)
    peak = float(np.max(rho.values))
    diff = params.m * peak ** (params.m - 1.0) if peak > 0.0 else 0.0
    bound = math.inf
    if diff > 0.0:
        bound = h * h / (2.0 * g.dim * diff)
    sup_b = drift.sup_norm(g.bounds, t)
    if sup_b > 0.0:
        bound = min(bound, h / sup_b)
    return params.cfl * bound


def _face_points(grid: GridSpec, axis: int) -> NDArray[np.float64]:
    """Coordinates of the faces normal to `axis`, shape (*face_shape, dim)."""
    lo, hi = grid.bounds[axis]
    n = grid.cells[axis]
    faces = lo + np.arange(n + 1) * ((hi - lo) / n)
    if grid.dim == 1:
        return faces.reshape(-1, 1)
    other = grid.axis_centers(1 - axis)
    if axis == 0:
        fx, fy = np.meshgrid(faces, other, indexing="ij")
    else:
        fx, fy = np.meshgrid(other, faces, indexing="ij")
    return np.stack([fx, fy], axis=-1)


def _face_drift(grid: GridSpec, drift: DriftSpec, t: float) -> tuple[NDArray[np.float64], ...]:
    out = []
    for axis in range(grid.dim):
        pts = _face_points(grid, axis)
        shape = pts.shape[:-1]
        vals = drift(pts.reshape(-1, grid.dim), t)[:, axis].reshape(shape)
        out.append(vals)
    return tuple(out)


def _ghost_points(grid: GridSpec, axis: int, side: int) -> NDArray[np.float64]:
    """Centers of the ghost cells just outside the given face."""
    lo, hi = grid.bounds[axis]
    h = grid.dx[axis]
    coord = lo - 0.5 * h if side == 0 else hi + 0.5 * h
    if grid.dim == 1:
        return np.array([[coord]])
    other = grid.axis_centers(1 - axis)
    pts = np.empty((len(other), 2))
    pts[:, axis] = coord
    pts[:, 1 - axis] = other
    return pts


_BC_CODE = {"noflux": _stepper.NOFLUX, "periodic": _stepper.PERIODIC}


class _StepWorkspace:
    """Pre-resolved boundary codes, ghost evaluators and face drift arrays."""

    def __init__(self, grid: GridSpec, drift: DriftSpec, params: SolverParams) -> None:
        self.grid = grid
        self.drift = drift
        self.params = params
        self.sides = params.sides(grid.dim)
        self.codes: list[int] = []
        self.traces: list[DirichletTrace | None] = []
        for axis in range(grid.dim):
            for side in self.sides[axis]:
                if isinstance(side, DirichletTrace):
                    self.codes.append(_stepper.DIRICHLET)
                    self.traces.append(side)
                else:
                    self.codes.append(_BC_CODE[side])
                    self.traces.append(None)
        self.ghost_pts = [
            _ghost_points(grid, axis, side)
            for axis in range(grid.dim)
            for side in (0, 1)
        ]
        self._faces_t: float | None = None
        self._faces: tuple[NDArray[np.float64], ...] | None = None

    def faces(self, t: float) -> tuple[NDArray[np.float64], ...]:
        if self.drift.time_dependent:
            return _face_drift(self.grid, self.drift, t)
        if self._faces is None:
            self._faces = _face_drift(self.grid, self.drift, 0.0)
        return self._faces

    def ghosts(self, t: float, m: float) -> tuple[list, list]:
        vals, valms = [], []
        for k, trace in enumerate(self.traces):
            if trace is None:
                n = 1 if self.grid.dim == 1 else self.ghost_pts[k].shape[0]
                g = np.zeros(n)
            else:
                g = trace(self.ghost_pts[k], t)
            vals.append(g)
            valms.append(g**m)
        return vals, valms

    def check_support_margin(self, rho: NDArray[np.float64]) -> None:
        if self.params.lift > 0.0:
            return
        peak = float(rho.max())
        if peak <= 0.0:
            return
        tol = SUPPORT_EMPTY_REL * peak
        w = SUPPORT_MARGIN_CELLS
        for axis in range(self.grid.dim):
            lo_side, hi_side = self.sides[axis]
            sl: list = [slice(None)] * self.grid.dim
            if lo_side == "noflux":
                sl[axis] = slice(0, w)
                if np.any(rho[tuple(sl)] > tol):
                    raise RuntimeError(
                        f"support reached the axis-{axis} lower boundary margin "
                        f"({w} cells); enlarge the box"
                    )
            if hi_side == "noflux":
                sl[axis] = slice(-w, None)
                if np.any(rho[tuple(sl)] > tol):
                    raise RuntimeError(
                        f"support reached the axis-{axis} upper boundary margin "
                        f"({w} cells); enlarge the box"
                    )

    def advance(self, rho: NDArray[np.float64], t: float, dt: float,
                out: NDArray[np.float64], rhom: NDArray[np.float64]) -> None:
        m = self.params.m
        _stepper.pow_m(rho, m, rhom)
        faces = self.faces(t)
        gv, gm = self.ghosts(t, m)
        g = self.grid
        if g.dim == 1:
            _stepper.step_1d(
                rho, rhom, faces[0], g.dx[0], dt,
                self.codes[0], self.codes[1],
                float(gv[0][0]), float(gv[1][0]), float(gm[0][0]), float(gm[1][0]),
                out,
            )
        else:
            _stepper.step_2d(
                rho, rhom, faces[0], faces[1], g.dx[0], g.dx[1], dt,
                self.codes[0], self.codes[1], self.codes[2], self.codes[3],
                gv[0], gv[1], gv[2], gv[3],
                gm[0], gm[1], gm[2], gm[3],
                out,
            )


# ---------------------------------------------------------------------------
# public stepping API


def step_density(rho: Field, drift: DriftSpec, params: SolverParams,
                 t: float, dt: float) -> Field:
    """One forward-Euler step; validates the CFL bound and support margin."""
    if rho.role != "density":
        raise ValueError("step_density expects a density field")
    adm = admissible_dt(rho, drift, params, t)
    if dt > adm * (1.0 + 1e-12):
        raise ValueError(
            f"dt = {dt:.6e} violates the CFL bound; admissible dt = {adm:.6e}"
        )
    ws = _StepWorkspace(rho.grid, drift, params)
    ws.check_support_margin(rho.values)
    out = np.empty_like(rho.values)
    rhom = np.empty_like(rho.values)
    ws.advance(rho.values, t, dt, out, rhom)
    return Field(rho.grid, out, role="density")


def run(rho0: Field, drift: DriftSpec, params: SolverParams) -> Trajectory:
    """March from t0 to t1 with per-step adaptive dt at the CFL bound.

    Snapshots are recorded every ``stride`` steps (auto-chosen to hit the
    ``snapshots`` target when stride is 0) plus always at t0 and t1.
    Deterministic: identical inputs give bit-identical trajectories.
    """
    if rho0.role != "density":
        raise ValueError("run expects a density field")
    grid = rho0.grid
    ws = _StepWorkspace(grid, drift, params)
    state = rho0.values.copy()
    if params.lift > 0.0:
        state = state + params.lift
    t = params.t0
    horizon = params.t1 - params.t0

    cur = Field(grid, state, role="density")
    dt0 = admissible_dt(cur, drift, params, t)
    dt_cap = horizon / max(params.snapshots, 1)
    est = (params.dt_fixed if params.dt_fixed > 0.0 else min(dt0, dt_cap))
    stride = params.stride
    if stride <= 0:
        est_steps = max(1, int(math.ceil(horizon / est)))
        stride = max(1, est_steps // max(params.snapshots, 1))

    snaps = [Snapshot(t, state.copy())]
    out = np.empty_like(state)
    rhom = np.empty_like(state)
    steps = 0
    logger.info(
        "run: grid=%s dx=%.4g dt0=%.3g stride=%d horizon=%.4g",
        grid.shape, min(grid.dx), est, stride, horizon,
    )
    # the drift part of the CFL bound is a box sup: hoist it out of the loop
    # for autonomous drifts, where it never changes
    h_min = min(grid.dx)
    sup_b = drift.sup_norm(grid.bounds, t)
    while t < params.t1 - 1e-13 * horizon:
        if drift.time_dependent:
            sup_b = drift.sup_norm(grid.bounds, t)
        peak = float(state.max())
        diff = params.m * peak ** (params.m - 1.0) if peak > 0.0 else 0.0
        bound = h_min * h_min / (2.0 * grid.dim * diff) if diff > 0.0 else math.inf
        if sup_b > 0.0:
            bound = min(bound, h_min / sup_b)
        adm = params.cfl * bound
        if params.dt_fixed > 0.0:
            if params.dt_fixed > adm * (1.0 + 1e-12):
                raise ValueError(
                    f"fixed dt = {params.dt_fixed:.6e} violates the CFL bound "
                    f"at t = {t:.6f}; admissible dt = {adm:.6e}"
                )
            dt = params.dt_fixed
        else:
            dt = min(adm, dt_cap)
        dt = min(dt, params.t1 - t)
        ws.check_support_margin(state)
        ws.advance(state, t, dt, out, rhom)
        state, out = out, state
        t += dt
        steps += 1
        if steps % stride == 0 and t < params.t1 - 1e-13 * horizon:
            snaps.append(Snapshot(t, state.copy()))
    if snaps[-1].t < t:
        snaps.append(Snapshot(t, state.copy()))
    logger.info("run: %d steps, %d snapshots", steps, len(snaps))

    floor_report = None
    if params.lift > 0.0:
        floor_report = _check_floor(grid, params, drift, snaps)
    return Trajectory(grid, params, drift, snaps, floor_report)


def _check_floor(grid: GridSpec, params: SolverParams, drift: DriftSpec,
                 snaps: list[Snapshot]) -> FloorReport:
    """Positivity floor of lifted runs: rho >= lift * exp(-sup|div b| t)."""
    rate = drift.sup_divergence(grid.bounds)
    tol = 10.0 * min(grid.dx) ** 2
    worst = math.inf
    first_bad: float | None = None
    for s in snaps:
        floor = params.lift * math.exp(-rate * (s.t - params.t0))
        margin = float(s.rho.min()) - floor
        if margin < worst:
            worst = margin
        if margin < -tol and first_bad is None:
            first_bad = s.t
    return FloorReport(
        passed=first_bad is None,
        floor_constant=params.lift,
        decay_rate=rate,
        worst_margin=worst,
        first_violation_time=first_bad,
        tolerance=tol,
    )


def lifted_run(rho0: Field, drift: DriftSpec, params: SolverParams) -> Trajectory:
    """Run with data lifted by epsilon = params.lift > 0; checks the floor."""
    if params.lift <= 0.0:
        raise ValueError("lifted_run needs params.lift > 0")
    return run(rho0, drift, params)


# ---------------------------------------------------------------------------
# weak-form residual


@dataclass(frozen=True)
class TestFunction:
    """Smooth compactly supported test function with analytic derivatives.

    ``space_support`` is an axis-aligned bounding box outside of which the
    function (and its derivatives) vanish; ``time_support = (ta, tb)``
    likewise in time.
    """

    __test__ = False  # keep pytest from collecting this as a test case

    value: Callable[[NDArray[np.float64], float], NDArray[np.float64]]
    dt: Callable[[NDArray[np.float64], float], NDArray[np.float64]]
    grad: Callable[[NDArray[np.float64], float], NDArray[np.float64]]
    space_support: tuple[tuple[float, float], ...]
    time_support: tuple[float, float]


def weak_form_residual(traj: Trajectory, test_fn: TestFunction) -> float:
    """Integrated weak-form defect of a trajectory against one test function.

        R = int int rho phi_t - int int (grad rho^m + rho b) . grad phi
            + int rho(t0) phi(., t0)

    which vanishes for exact solutions with phi(., t1) = 0.  Space integrals
    are midpoint sums on the grid; the time integral is a trapezoid over the
    snapshot times.  For a converged run |R| = O(dx + dt).
    """
    grid = traj.grid
    for (slo, shi), (blo, bhi), h in zip(
        test_fn.space_support, grid.bounds, grid.dx
    ):
        if slo < blo + 2 * h or shi > bhi - 2 * h:
            raise ValueError("test function support must stay inside the box")
    ta, tb = test_fn.time_support
    if ta < traj.params.t0 - 1e-12 or tb > traj.params.t1 + 1e-12:
        raise ValueError("test function time support must lie inside [t0, t1]")

    pts = np.stack([c.ravel() for c in grid.centers()], axis=-1)
    vol = grid.cell_volume
    m = traj.params.m

    integrand = np.empty(len(traj))
    for i in range(len(traj)):
        t = float(traj.times[i])
        rho = traj.snapshots[i].rho.ravel()
        phi_t = test_fn.dt(pts, t)
        a = float(np.sum(rho * phi_t)) * vol

        rho_m = Field(grid, traj.snapshots[i].rho ** m)
        grad_rm = discrete_gradient(rho_m)
        gphi = test_fn.grad(pts, t)
        bvals = traj.drift(pts, t)
        flux = 0.0
        for axis in range(grid.dim):
            comp = grad_rm.components[axis].ravel() + rho * bvals[:, axis]
            flux += float(np.sum(comp * gphi[:, axis])) * vol
        integrand[i] = a - flux

    total = float(np.trapezoid(integrand, traj.times))
    rho0 = traj.snapshots[0].rho.ravel()
    phi0 = test_fn.value(pts, float(traj.times[0]))
    total += float(np.sum(rho0 * phi0)) * vol
    return total


# ---------------------------------------------------------------------------
# comparison harness


def check_comparison(traj_low: Trajectory, traj_high: Trajectory) -> ComparisonReport:
    """Assert discrete ordering rho_low <= rho_high at every common snapshot.

    Runs must share grid, drift, m and snapshot times (pair them with
    ``dt_fixed``).  The scheme is monotone under the CFL bound, so ordering
    should hold to round-off; the tolerance 10 dx^2 covers IO round-trips.
    """
    if traj_low.grid != traj_high.grid:
        raise ValueError("comparison requires a common grid")
    if traj_low.drift != traj_high.drift:
        raise ValueError("comparison requires a common drift")
    if traj_low.params.m != traj_high.params.m:
        raise ValueError("comparison requires a common exponent m")
    if len(traj_low) != len(traj_high) or not np.allclose(
        traj_low.times, traj_high.times, rtol=1e-9, atol=1e-12
    ):
        raise ValueError("comparison requires matching snapshot times")

    grid = traj_low.grid
    tol = 10.0 * min(grid.dx) ** 2
    worst = 0.0
    first: tuple[tuple[float, ...], float] | None = None
    centers = grid.centers()
    for i in range(len(traj_low)):
        diff = traj_low.snapshots[i].rho - traj_high.snapshots[i].rho
        v = float(diff.max())
        if v > worst:
            worst = v
        if v > tol and first is None:
            idx = np.unravel_index(int(np.argmax(diff)), diff.shape)
            point = tuple(float(c[idx]) for c in centers)
            first = (point, float(traj_low.times[i]))
    return ComparisonReport(
        passed=first is None,
        max_violation=worst,
        tolerance=tol,
        first_violation=first,
    )


# ---------------------------------------------------------------------------
# pressure-equation residual


def pressure_residual(u: Field, drift: DriftSpec, u_t: Field, m: float,
                      t: float = 0.0,
                      threshold_rel: float = DEFAULT_THRESHOLD_REL) -> Field:
    """Pointwise residual of u_t = (m-1) u lap u + |grad u|^2 + grad u . b
    + (m-1) u div b, evaluated on the positive set.

    Cells within 2 cells of the free boundary, outside the positive set, or
    in the box-edge collar are flagged in ``boundary_influenced`` and their
    residual is zeroed: the equation is only classical in the open positive
    set, and the stencils need room.
    """
    grid = u.grid
    lap = discrete_laplacian(u).values
    grad = discrete_gradient(u)
    pts = np.stack([c.ravel() for c in grid.centers()], axis=-1)
    bvals = drift(pts, t)
    div = drift.divergence(pts, t).reshape(grid.shape)

    adv = np.zeros(grid.shape)
    g2 = np.zeros(grid.shape)
    for axis in range(grid.dim):
        comp = grad.components[axis]
        adv += comp * bvals[:, axis].reshape(grid.shape)
        g2 += comp * comp

    resid = u_t.values - (m - 1.0) * u.values * lap - g2 - adv - (m - 1.0) * u.values * div

    mask, _ = positivity_set(u, threshold_rel)
    deep = ndimage.binary_erosion(mask, iterations=2) if mask.any() else mask
    excluded = ~deep | ~interior_mask(grid, BOUNDARY_COLLAR)
    resid = np.where(excluded, 0.0, resid)
    return Field(grid, resid, role="scalar", boundary_influenced=excluded)
