"""Quantitative verifiers over finished runs.

Each function here measures a constant the regularity theory says exists —
a curvature floor, a vacuum-persistence coefficient, a non-degeneracy slope,
a monotonicity cone — and returns the fitted value with a pass flag and the
worst witness.  Verifiers are read-only and deterministic; none of them
mutates a trajectory, so they can be applied in any order (or in parallel)
to the same run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy import ndimage

from .drift import DriftSpec
from .grids import (
    BOUNDARY_COLLAR,
    DEFAULT_THRESHOLD_REL,
    Field,
    GridSpec,
    discrete_gradient,
    discrete_laplacian,
    interior_mask,
    mollify,
    sample_linear,
)
from .solver import Trajectory
from .streamlines import integrate_streamline

__all__ = [
    "ConeSpec",
    "EstimateReport",
    "aronson_benilan",
    "ball_average",
    "vacuum_persistence_check",
    "average_positivity_check",
    "green_weight",
    "green_moment",
    "nondegeneracy_probe",
    "semiconvexity_constant",
    "cone_monotonicity",
    "cone_angle_scan",
    "grad_floor_check",
    "pressure_growth_check",
    "reports_csv",
]


# --------------------------------------------------------------------------
# report plumbing
# --------------------------------------------------------------------------


@dataclass(eq=False)
class ConeSpec:
    """Direction cone: unit axis plus half-angle; optionally a space-time axis."""

    axis: NDArray[np.float64]
    half_angle: float
    st_axis: NDArray[np.float64] | None = None

    def __post_init__(self) -> None:
        self.axis = np.asarray(self.axis, dtype=float).ravel()
        if abs(float(np.linalg.norm(self.axis)) - 1.0) > 1e-12:
            raise ValueError("cone axis must be a unit vector")
        if not 0.0 < self.half_angle <= 0.5 * math.pi:
            raise ValueError("half-angle must lie in (0, pi/2]")
        if self.st_axis is not None:
            self.st_axis = np.asarray(self.st_axis, dtype=float).ravel()
            if self.st_axis.size != self.axis.size + 1:
                raise ValueError("space-time axis needs one extra component")
            if abs(float(np.linalg.norm(self.st_axis)) - 1.0) > 1e-12:
                raise ValueError("space-time axis must be a unit vector")


@dataclass
class EstimateReport:
    """Outcome of one verifier: fitted constants, verdict, worst witness.

    ``passed`` is True/False for a decided check and None when the check's
    hypothesis never applied (inconclusive).  ``witness`` is the worst
    offending (point, time) pair when there is one.  ``resolution`` records
    the cell width the constants were fitted at.
    """

    name: str
    fitted: dict[str, float]
    passed: bool | None
    witness: tuple | None
    tolerances: dict[str, float]
    resolution: float
    note: str = ""

    def format_record(self) -> str:
        verdict = {True: "pass", False: "fail", None: "inconclusive"}[self.passed]
        lines = [f"check: {self.name}", f"verdict: {verdict}  dx: {self.resolution:.6g}"]
        for k, v in self.fitted.items():
            lines.append(f"  {k} = {v:.10g}")
        for k, v in self.tolerances.items():
            lines.append(f"  tol[{k}] = {v:.6g}")
        if self.witness is not None:
            pt, t = self.witness
            coords = ", ".join(f"{c:.6g}" for c in np.atleast_1d(pt))
            lines.append(f"  witness: ({coords}) at t = {t:.6g}")
        if self.note:
            lines.append(f"  note: {self.note}")
        return "\n".join(lines)


def reports_csv(reports: list[EstimateReport]) -> str:
    """One row per fitted constant, for cross-run comparison of fits."""
    rows = ["check,constant,value,verdict,dx"]
    for r in reports:
        verdict = {True: "pass", False: "fail", None: "inconclusive"}[r.passed]
        for k, v in r.fitted.items():
            rows.append(f"{r.name},{k},{v:.17g},{verdict},{r.resolution:.17g}")
    return "\n".join(rows) + "\n"


def _unit(vec) -> NDArray[np.float64]:
    v = np.asarray(vec, dtype=float).ravel()
    if abs(float(np.linalg.norm(v)) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    return v


def _cell_points(grid: GridSpec) -> NDArray[np.float64]:
    """All cell centers as an (n_cells, dim) array in C order."""
    centers = grid.centers()
    return np.stack([c.ravel() for c in centers], axis=-1)


# --------------------------------------------------------------------------
# semi-convexity of the pressure
# --------------------------------------------------------------------------


def _laplacian_minima(
    traj: Trajectory, mollify_radius: float
) -> tuple[list[int], NDArray[np.float64], NDArray[np.float64], list[tuple]]:
    """Per-snapshot interior minimum of the mollified pressure Laplacian."""
    grid = traj.grid
    reach = int(math.floor(mollify_radius / min(grid.dx)))
    inner = interior_mask(grid, BOUNDARY_COLLAR + reach + 1)
    ks = [k for k in range(len(traj)) if traj.times[k] > 0.0]
    mins, ts, spots = [], [], []
    pts = _cell_points(grid)
    for k in ks:
        um = mollify(traj.pressure(k), mollify_radius)
        lap = discrete_laplacian(um).values
        masked = np.where(inner, lap, np.inf)
        j = int(np.argmin(masked))
        mins.append(float(masked.flat[j]))
        ts.append(float(traj.times[k]))
        spots.append((tuple(pts[j]), float(traj.times[k])))
    return ks, np.array(ts), np.array(mins), spots


def aronson_benilan(traj: Trajectory, mollify_radius: float | None = None) -> EstimateReport:
    """Semi-convexity floor of the pressure: fit min lap(u) >= -s1/t - s2.

    Minima are taken over the mollified pressure away from the box collar;
    the fit is least squares in (s1, s2) against the per-snapshot minima and
    the pass verdict allows a 10*dx slack below the fitted curve.
    """
    grid = traj.grid
    dx = max(grid.dx)
    if mollify_radius is None:
        mollify_radius = 2.0 * dx
    ks, ts, mins, spots = _laplacian_minima(traj, mollify_radius)
    if len(ks) < 4:
        raise ValueError("need at least 4 positive-time snapshots to fit a floor")
    # least squares for mins ~ -s1/t - s2
    design = np.stack([-1.0 / ts, -np.ones_like(ts)], axis=1)
    coef, *_ = np.linalg.lstsq(design, mins, rcond=None)
    s1, s2 = (float(c) for c in coef)
    slack = 10.0 * dx
    margins = mins - (-s1 / ts - s2 - slack)
    worst = int(np.argmin(margins))
    return EstimateReport(
        name="semiconvexity",
        fitted={"sigma1": s1, "sigma2": s2, "worst_margin": float(margins[worst])},
        passed=bool(np.all(margins >= 0.0)),
        witness=spots[worst],
        tolerances={"slack": slack, "mollify_radius": mollify_radius},
        resolution=dx,
    )


# --------------------------------------------------------------------------
# ball averages and their consequences
# --------------------------------------------------------------------------


def _ball_mask(grid: GridSpec, center: NDArray[np.float64], radius: float) -> NDArray[np.bool_]:
    if grid.dim == 1:
        return np.abs(grid.axis_centers(0) - center[0]) <= radius
    x, y = grid.centers()
    return np.hypot(x - center[0], y - center[1]) <= radius


def ball_average(u: Field, center, R: float) -> float:
    """Mean of a field over the cells inside a ball (midpoint quadrature)."""
    grid = u.grid
    c = np.asarray(center, dtype=float).ravel()
    if c.size != grid.dim:
        raise ValueError(f"center must be a {grid.dim}-vector")
    for a, (lo, hi) in enumerate(grid.bounds):
        if c[a] - R < lo or c[a] + R > hi:
            raise ValueError("ball must sit inside the box")
    mask = _ball_mask(grid, c, R)
    n = int(mask.sum())
    if n < 3:
        raise ValueError(f"ball of radius {R:.4g} covers only {n} cells")
    return float(u.values[mask].mean())


def _ball_clear(u: Field, center, radius: float, level: float) -> tuple[bool, tuple | None]:
    """Is the field at or below `level` on every cell of the ball?"""
    mask = _ball_mask(u.grid, np.asarray(center, float).ravel(), radius)
    vals = np.where(mask, u.values, -np.inf)
    j = int(np.argmax(vals))
    if vals.flat[j] > level:
        return False, tuple(_cell_points(u.grid)[j])
    return True, None


def vacuum_persistence_check(
    traj: Trajectory, fb_point: tuple, R: float, tau: float, shrink: float = 6.0
) -> EstimateReport:
    """Small forward averages keep a vacuum ball empty (on a 1/shrink copy).

    Starting from a verified empty ball B(x0, R) at t0, every stored offset
    s <= tau is scored: the mean of u(., t0+s) on the ball carried by the
    streamline yields the coefficient avg*s/R^2, and the conclusion asks
    u(., t0+s) to vanish on the radius-R/shrink ball at the carried center.
    The returned c0 is the largest coefficient for which "hypothesis below
    c0 implies conclusion" holds across the whole run.
    """
    x0, t0 = fb_point
    x0 = np.asarray(x0, dtype=float).ravel()
    grid = traj.grid
    dx = max(grid.dx)
    k0 = traj.index_at(t0)
    u0 = traj.pressure(k0)
    level0 = DEFAULT_THRESHOLD_REL * float(u0.values.max())
    ok, spot = _ball_clear(u0, x0, R, level0)
    if not ok:
        return EstimateReport(
            name="vacuum-persistence",
            fitted={"c0": math.nan},
            passed=None,
            witness=(spot, float(traj.times[k0])),
            tolerances={"threshold_rel": DEFAULT_THRESHOLD_REL},
            resolution=dx,
            note="initial ball touches the support",
        )

    needed, concluded, taus = [], [], []
    for k in range(k0 + 1, len(traj)):
        s = float(traj.times[k] - traj.times[k0])
        if s > tau + 1e-12:
            break
        path = integrate_streamline(x0, float(traj.times[k0]), s, traj.drift,
                                    h_ode=max(s / 64.0, 1e-6), box=grid)
        if path.truncated:
            continue
        xc = path.end
        inside = all(
            lo + R <= xc[a] <= hi - R for a, (lo, hi) in enumerate(grid.bounds)
        )
        if not inside:
            continue
        uk = traj.pressure(k)
        avg = ball_average(uk, xc, R)
        level = DEFAULT_THRESHOLD_REL * float(uk.values.max())
        ok, spot = _ball_clear(uk, xc, R / shrink, level)
        taus.append(s)
        needed.append(avg * s / (R * R))
        concluded.append((ok, spot, s, xc))

    if not taus:
        return EstimateReport(
            name="vacuum-persistence",
            fitted={"c0": math.nan},
            passed=None,
            witness=None,
            tolerances={"threshold_rel": DEFAULT_THRESHOLD_REL},
            resolution=dx,
            note="no usable offsets: streamline or ball left the box",
        )

    failing = [i for i, (ok, _, _, _) in enumerate(concluded) if not ok]
    if failing:
        c0 = (1.0 - 1e-12) * min(needed[i] for i in failing)
    else:
        c0 = math.inf
    usable = [i for i in range(len(taus)) if needed[i] <= c0]
    if c0 <= 0.0:
        i_bad = min(failing, key=lambda i: needed[i])
        _, spot, s_bad, _ = concluded[i_bad]
        return EstimateReport(
            name="vacuum-persistence",
            fitted={"c0": 0.0, "offsets": float(len(taus))},
            passed=False,
            witness=(spot, float(traj.times[k0]) + s_bad),
            tolerances={"threshold_rel": DEFAULT_THRESHOLD_REL},
            resolution=dx,
            note="vacuum lost even with zero average",
        )
    if not usable:
        return EstimateReport(
            name="vacuum-persistence",
            fitted={"c0": c0, "offsets": float(len(taus))},
            passed=None,
            witness=None,
            tolerances={"threshold_rel": DEFAULT_THRESHOLD_REL},
            resolution=dx,
            note="hypothesis never satisfiable in this run",
        )
    return EstimateReport(
        name="vacuum-persistence",
        fitted={"c0": c0, "offsets": float(len(taus)),
                "offsets_with_hypothesis": float(len(usable))},
        passed=True,
        witness=None,
        tolerances={"threshold_rel": DEFAULT_THRESHOLD_REL},
        resolution=dx,
    )


def _unit_ball_volume(d: int) -> float:
    return 2.0 if d == 1 else math.pi


def _semiconvexity_sup(traj: Trajectory, ks: list[int]) -> float:
    """Largest observed (-lap u)_+ on the eroded support over the snapshots."""
    grid = traj.grid
    inner = interior_mask(grid, BOUNDARY_COLLAR)
    out = 0.0
    for k in ks:
        u = traj.pressure(k)
        thr = DEFAULT_THRESHOLD_REL * float(u.values.max())
        core = ndimage.binary_erosion(u.values > thr, iterations=2) & inner
        if not core.any():
            continue
        lap = discrete_laplacian(u).values
        out = max(out, float(np.max(np.maximum(-lap[core], 0.0))))
    return out


def semiconvexity_constant(traj: Trajectory) -> float:
    """Observed concavity bound: sup of (-lap u)_+ over the eroded support.

    The raw (unmollified) Laplacian is used, so this is a conservative
    input for constants that must dominate the true pressure concavity.
    """
    return _semiconvexity_sup(traj, list(range(len(traj))))


def average_positivity_check(
    traj: Trajectory, fb_point: tuple, R: float, tau: float, lam: float,
    sigma: float = 1.0,
) -> EstimateReport:
    """A large ball average forces positivity at the transported center.

    The hypothesis coefficient c1 = avg * tau / R^2 is measured at (x0, t0);
    the conclusion value c2 = u(X(lam*tau), t0+lam*tau) * tau / R^2 is the
    largest coefficient the run supports.  Alongside the verdict the proof
    diagnostics are reported: Y(s) = the ball integral of the rescaled
    density power, its time integral Z, and whether Y keeps the exponential
    floor exp(-sigma*eps*s) * Y(0) - sigma*eps*s with eps = C0 * tau.
    """
    x0, t0 = fb_point
    x0 = np.asarray(x0, dtype=float).ravel()
    grid = traj.grid
    dx = max(grid.dx)
    k0 = traj.index_at(t0)
    t_end = float(traj.times[k0]) + lam * tau
    if t_end > float(traj.times[-1]) + 1e-12:
        raise ValueError("run too short for the requested lam * tau horizon")
    u0 = traj.pressure(k0)
    avg = ball_average(u0, x0, R)
    level = DEFAULT_THRESHOLD_REL * float(u0.values.max())
    if avg <= level:
        return EstimateReport(
            name="average-positivity",
            fitted={"c1": 0.0, "c2": math.nan},
            passed=None,
            witness=None,
            tolerances={"threshold_rel": DEFAULT_THRESHOLD_REL},
            resolution=dx,
            note="starting ball average vanishes: hypothesis fails",
        )
    c1 = avg * tau / (R * R)

    path = integrate_streamline(x0, float(traj.times[k0]), lam * tau, traj.drift,
                                h_ode=max(lam * tau / 64.0, 1e-9), box=grid)
    if path.truncated:
        return EstimateReport(
            name="average-positivity",
            fitted={"c1": c1, "c2": math.nan},
            passed=None,
            witness=None,
            tolerances={"threshold_rel": DEFAULT_THRESHOLD_REL},
            resolution=dx,
            note="streamline left the box",
        )
    x_end = path.end
    u_end = float(traj.sample_pressure(x_end[None, :], t_end)[0])
    c2 = u_end * tau / (R * R)

    # proof diagnostics on the snapshots inside the window
    m = traj.params.m
    ks = [k for k in range(k0, len(traj)) if traj.times[k] <= t_end + 1e-12]
    ys, ss = [], []
    scale = (tau / (R * R)) ** m * _unit_ball_volume(grid.dim)
    for k in ks:
        s = float(traj.times[k] - traj.times[k0]) / tau
        p = integrate_streamline(x0, float(traj.times[k0]), s * tau, traj.drift,
                                 h_ode=max(lam * tau / 64.0, 1e-9), box=grid)
        if p.truncated:
            break
        inside = all(
            lo + R <= p.end[a] <= hi - R for a, (lo, hi) in enumerate(grid.bounds)
        )
        if not inside:
            break
        um = traj.pressure(k).values ** m
        ys.append(scale * float(um[_ball_mask(grid, p.end, R)].mean()))
        ss.append(s)
    ys_arr, ss_arr = np.array(ys), np.array(ss)
    z_end = float(np.trapezoid(ys_arr, ss_arr)) if len(ys) > 1 else 0.0
    c0_meas = _semiconvexity_sup(traj, ks)
    eps = c0_meas * tau
    floor = np.exp(-sigma * eps * ss_arr) * ys_arr[0] - sigma * eps * ss_arr
    y_floor_ok = bool(np.all(ys_arr >= floor - 1e-12))

    passed = u_end > level
    return EstimateReport(
        name="average-positivity",
        fitted={
            "c1": c1,
            "c2": c2,
            "ratio": c2 / c1,
            "Y0": float(ys_arr[0]),
            "Y_end": float(ys_arr[-1]),
            "Z_end": z_end,
            "epsilon": eps,
            "y_floor_ok": float(y_floor_ok),
        },
        passed=passed,
        witness=None if passed else (tuple(x_end), t_end),
        tolerances={"threshold_rel": DEFAULT_THRESHOLD_REL, "sigma": sigma},
        resolution=dx,
    )


# --------------------------------------------------------------------------
# Green moments on the unit ball
# --------------------------------------------------------------------------


def green_weight(r, d: int):
    """Unit-ball Green weight, zero-mean-normalized: G and grad G vanish at r=1."""
    r = np.asarray(r, dtype=float)
    if d == 2:
        return -np.log(r) - 0.5 * (1.0 - r * r)
    if d == 3:
        return 1.0 / r - 1.0 - 0.5 * (1.0 - r * r)
    raise ValueError("green_weight supports d = 2 or 3")


# closed forms for the cell holding the singularity; F1 = int_{[0,1]^2} log|y| dy
_LOG_CELL_F1 = math.log(2.0) / 2.0 - 1.5 + math.pi / 4.0


def _singular_cell_integral_2d(h: float) -> float:
    """Exact integral of G over the square cell of width h centered at 0."""
    # int_cell -log r = -h^2 (log(h/2) + F1); the polynomial part integrates
    # to -h^2/2 + h^4/12 exactly
    return -h * h * (math.log(0.5 * h) + _LOG_CELL_F1) - 0.5 * h * h + h ** 4 / 12.0


def _singular_cell_integral_3d(a: float) -> float:
    """Exact integral of G * 4 pi r^2 over the radial cell [0, a]."""
    return 2.0 * math.pi * a * a - 2.0 * math.pi * a ** 3 + 0.4 * math.pi * a ** 5


def green_moment(xi: Field, d: int | None = None) -> float:
    """Integral of the unit-ball Green weight against a density field.

    d = 2 takes a planar field supported in the unit disk; d = 3 takes a
    one-dimensional radial profile xi(r) on [0, 1) integrated with the
    4 pi r^2 surface weight.  The cell containing the singularity is
    integrated in closed form instead of sampled.
    """
    grid = xi.grid
    if d is None:
        d = 2 if grid.dim == 2 else 3
    if d == 2:
        if grid.dim != 2:
            raise ValueError("d = 2 moment needs a planar field")
        x, y = grid.centers()
        r = np.hypot(x, y)
        outside = (r > 1.0) & (xi.values > 0.0)
        if outside.any():
            raise ValueError("density must vanish outside the unit ball")
        h = max(grid.dx)
        vol = grid.cell_volume
        sing = r < 0.5 * h  # at most one cell center can sit this close to 0
        vals = np.where(sing, 0.0, green_weight(np.where(sing, 1.0, r), 2))
        out = float(np.sum(vals * xi.values) * vol)
        if sing.any():
            out += float(xi.values[sing][0]) * _singular_cell_integral_2d(h)
        return out
    if d == 3:
        if grid.dim != 1:
            raise ValueError("d = 3 moment needs a radial profile on [0, 1)")
        rr = grid.axis_centers(0)
        if grid.bounds[0][0] < -1e-12:
            raise ValueError("radial profile must start at r = 0")
        outside = (rr > 1.0) & (xi.values > 0.0)
        if outside.any():
            raise ValueError("density must vanish outside the unit ball")
        h = grid.dx[0]
        sing = rr < 0.75 * h  # first radial cell [0, h] has center exactly h/2
        weights = 4.0 * math.pi * rr * rr * h
        vals = np.where(sing, 0.0, green_weight(np.where(sing, 1.0, rr), 3))
        out = float(np.sum(vals * xi.values * weights))
        if sing.any():
            out += float(xi.values[sing][0]) * _singular_cell_integral_3d(
                float(rr[sing][0]) + 0.5 * h
            )
        return out
    raise ValueError("green_moment supports d = 2 or 3")


# --------------------------------------------------------------------------
# non-degeneracy probes
# --------------------------------------------------------------------------


def _on_contour(traj: Trajectory, k: int, x: NDArray[np.float64], tol: float) -> bool:
    best = math.inf
    for poly in traj.contour(k):
        best = min(best, float(np.min(np.linalg.norm(poly - x[None, :], axis=1))))
    return best <= tol


def nondegeneracy_probe(
    traj: Trajectory, fb_points: list, mu, eps_list: list, kappa_min: float = 0.0
) -> EstimateReport:
    """Pressure slope just inside the front: kappa = min u(x + eps*mu) / eps.

    Probes that would leave the box skip their front point.  The verdict
    compares the fitted kappa against `kappa_min`.
    """
    grid = traj.grid
    dx = max(grid.dx)
    mu_v = _unit(mu)
    eps_arr = [float(e) for e in eps_list]
    if not eps_arr:
        raise ValueError("eps_list must be non-empty")
    if min(eps_arr) < 2.0 * dx - 1e-12:
        raise ValueError("probe offsets must be at least two cells")

    kappa = math.inf
    witness = None
    used = 0
    for x, t in fb_points:
        x = np.asarray(x, dtype=float).ravel()
        k = traj.index_at(t)
        if not _on_contour(traj, k, x, dx):
            raise ValueError("probe point is not within one cell of the front")
        probes = np.stack([x + e * mu_v for e in eps_arr])
        inside = all(
            grid.bounds[a][0] <= p[a] <= grid.bounds[a][1]
            for p in probes for a in range(grid.dim)
        )
        if not inside:
            continue  # probe exits the box: skip this point
        used += 1
        vals = sample_linear(traj.pressure(k), probes)
        for e, v in zip(eps_arr, vals):
            ratio = float(v) / e
            if ratio < kappa:
                kappa = ratio
                witness = (tuple(x), float(traj.times[k]))
    if used == 0:
        return EstimateReport(
            name="nondegeneracy",
            fitted={"kappa": math.nan},
            passed=None,
            witness=None,
            tolerances={"kappa_min": kappa_min},
            resolution=dx,
            note="every probe exits the box",
        )
    return EstimateReport(
        name="nondegeneracy",
        fitted={"kappa": kappa, "points_used": float(used)},
        passed=bool(kappa >= kappa_min),
        witness=witness,
        tolerances={"kappa_min": kappa_min},
        resolution=dx,
    )


# --------------------------------------------------------------------------
# cone monotonicity
# --------------------------------------------------------------------------


def _cone_directions(cone: ConeSpec, rays: int) -> NDArray[np.float64]:
    """Unit directions fanning the planar cone: both edges, axis, interior."""
    n = max(int(rays), 16) + 1  # odd counts keep the axis in the fan
    if n % 2 == 0:
        n += 1
    base = math.atan2(cone.axis[1], cone.axis[0])
    angles = base + np.linspace(-cone.half_angle, cone.half_angle, n)
    return np.stack([np.cos(angles), np.sin(angles)], axis=1)


def cone_monotonicity(
    u: Field, cone: ConeSpec, region=None, rays: int = 16, h: float | None = None
) -> float:
    """Largest decrease of u along any sampled cone direction (<= 0 = monotone).

    Samples u(x) - u(x + h p) over cells x in the region and directions p in
    the cone fan; h defaults to two cells.  Cells whose shifted point falls
    outside the box are excluded for that direction.
    """
    grid = u.grid
    if grid.dim != 2:
        raise ValueError("cone monotonicity needs a planar field")
    if h is None:
        h = 2.0 * max(grid.dx)
    if region is None:
        region = grid.bounds
    x, y = grid.centers()
    in_region = (
        (x >= region[0][0]) & (x <= region[0][1])
        & (y >= region[1][0]) & (y <= region[1][1])
    )
    pts = _cell_points(grid)
    base_vals = u.values.ravel()
    sel = in_region.ravel()
    worst = -math.inf
    for p in _cone_directions(cone, rays):
        shifted = pts + h * p[None, :]
        ok = sel.copy()
        for a, (lo, hi) in enumerate(grid.bounds):
            ok &= (shifted[:, a] >= lo) & (shifted[:, a] <= hi)
        if not ok.any():
            continue
        ahead = sample_linear(u, shifted[ok])
        worst = max(worst, float(np.max(base_vals[ok] - ahead)))
    if worst == -math.inf:
        raise ValueError("region too small: no cell admits a shifted sample")
    return worst


def _largest_passing_angle(pred, lo: float, hi: float, iters: int = 14) -> float:
    """Golden-section shrink onto the pass/fail boundary of a predicate."""
    if not pred(lo):
        return 0.0
    if pred(hi):
        return hi
    g = (math.sqrt(5.0) - 1.0) / 2.0
    for _ in range(iters):
        mid = hi - g * (hi - lo)
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo


def cone_angle_scan(
    traj: Trajectory,
    fb_point: tuple,
    scales: list,
    tol: float | None = None,
    rays: int = 16,
) -> EstimateReport:
    """Largest monotonicity cone per dyadic window around a front point.

    For each window half-width the scan searches axis candidates around the
    inward pressure gradient and golden-sections the half-angle; it reports
    the per-scale angles and whether they are non-decreasing as the window
    shrinks.  Windows narrower than 8 cells stop the scan.
    """
    x0, t0 = fb_point
    x0 = np.asarray(x0, dtype=float).ravel()
    grid = traj.grid
    dx = max(grid.dx)
    if tol is None:
        tol = 10.0 * dx
    k0 = traj.index_at(t0)
    u = traj.pressure(k0)

    grad = discrete_gradient(u).components
    gvec = np.array([
        float(sample_linear(Field(grid, g, role="scalar"), x0[None, :])[0])
        for g in grad
    ])
    nrm = float(np.linalg.norm(gvec))
    base_axis = gvec / nrm if nrm > 0 else np.array([1.0, 0.0])
    base_angle = math.atan2(base_axis[1], base_axis[0])

    thetas: list[float] = []
    fitted: dict[str, float] = {}
    for i, scale in enumerate(scales):
        if 2.0 * scale < 8.0 * dx:
            break  # window no longer resolves a fan
        region = tuple(
            (max(lo, x0[a] - scale), min(hi, x0[a] + scale))
            for a, (lo, hi) in enumerate(grid.bounds)
        )
        best = 0.0
        for psi in np.linspace(-math.pi / 3.0, math.pi / 3.0, 9):
            ang = base_angle + psi
            axis = np.array([math.cos(ang), math.sin(ang)])

            def passes(theta: float, axis=axis) -> bool:
                cone = ConeSpec(axis, theta)
                return cone_monotonicity(u, cone, region, rays=rays) <= tol

            best = max(best, _largest_passing_angle(passes, 0.05, 0.5 * math.pi))
        thetas.append(best)
        fitted[f"theta_{i}"] = best
        fitted[f"scale_{i}"] = float(scale)
    if not thetas:
        return EstimateReport(
            name="cone-angles",
            fitted={},
            passed=None,
            witness=(tuple(x0), float(traj.times[k0])),
            tolerances={"tol": tol},
            resolution=dx,
            note="every window was below 8 cells",
        )
    monotone = all(b >= a - 1e-9 for a, b in zip(thetas, thetas[1:]))
    return EstimateReport(
        name="cone-angles",
        fitted=fitted,
        passed=monotone,
        witness=(tuple(x0), float(traj.times[k0])),
        tolerances={"tol": tol},
        resolution=dx,
    )


# --------------------------------------------------------------------------
# directional slope floor and growth control
# --------------------------------------------------------------------------


def grad_floor_check(
    traj: Trajectory, mu, delta: float, h: float | None = None
) -> EstimateReport:
    """Floor on the directional slope of u near the front, over all snapshots.

    c1 = min over the band {u > threshold, within delta of the front} of the
    forward difference quotient (u(x + h mu) - u(x)) / h; pass means the
    floor is strictly positive (uniform non-degeneracy along mu).
    """
    grid = traj.grid
    dx = max(grid.dx)
    mu_v = _unit(mu)
    if mu_v.size != grid.dim:
        raise ValueError(f"mu must be a {grid.dim}-vector")
    if h is None:
        h = 2.0 * dx
    band_cells = max(1, int(math.ceil(delta / min(grid.dx))))
    inner = interior_mask(grid, BOUNDARY_COLLAR)
    pts = _cell_points(grid)

    c1 = math.inf
    witness = None
    any_cells = False
    for k in range(len(traj)):
        u = traj.pressure(k)
        thr = DEFAULT_THRESHOLD_REL * float(u.values.max())
        support = u.values > thr
        if not support.any():
            continue
        band = support & ndimage.binary_dilation(~support, iterations=band_cells)
        band &= inner
        sel = band.ravel()
        if not sel.any():
            continue
        shifted = pts[sel] + h * mu_v[None, :]
        ok = np.ones(shifted.shape[0], dtype=bool)
        for a, (lo, hi) in enumerate(grid.bounds):
            ok &= (shifted[:, a] >= lo) & (shifted[:, a] <= hi)
        if not ok.any():
            continue
        any_cells = True
        quot = (sample_linear(u, shifted[ok]) - u.values.ravel()[sel][ok]) / h
        j = int(np.argmin(quot))
        if float(quot[j]) < c1:
            c1 = float(quot[j])
            witness = (tuple(pts[sel][ok][j]), float(traj.times[k]))
    if not any_cells:
        return EstimateReport(
            name="slope-floor",
            fitted={"c1": math.nan, "delta1": delta},
            passed=None,
            witness=None,
            tolerances={"h": h},
            resolution=dx,
            note="no positive cells in the front band",
        )
    return EstimateReport(
        name="slope-floor",
        fitted={"c1": c1, "delta1": delta},
        passed=bool(c1 > 0.0),
        witness=witness,
        tolerances={"h": h},
        resolution=dx,
    )


def pressure_growth_check(
    traj: Trajectory, mu, region=None, tol: float | None = None
) -> EstimateReport:
    """Two-sided control of u_t on a region, fitted from the run.

    Upper side: the smallest A with u_t <= A (mu . grad u + u + 1) + tol over
    the region and interior snapshot pairs.  Lower side: asserts
    u_t >= |grad u|^2 + grad u . b - K u - tol with K = (m-1)(C0 + div_b+)
    measured from the run's own curvature floor.
    """
    grid = traj.grid
    dx = max(grid.dx)
    if len(traj) < 3:
        raise ValueError("need at least 3 snapshots to estimate u_t")
    mu_v = _unit(mu)
    if tol is None:
        tol = 10.0 * dx
    if region is None:
        region = grid.bounds
    centers = grid.centers()
    if grid.dim == 1:
        in_region = (centers[0] >= region[0][0]) & (centers[0] <= region[0][1])
    else:
        in_region = (
            (centers[0] >= region[0][0]) & (centers[0] <= region[0][1])
            & (centers[1] >= region[1][0]) & (centers[1] <= region[1][1])
        )
    sel = in_region & interior_mask(grid, BOUNDARY_COLLAR)
    if not sel.any():
        raise ValueError("region holds no interior cells")
    pts = _cell_points(grid)[sel.ravel()]

    ks = list(range(1, len(traj) - 1))
    c0_meas = _semiconvexity_sup(traj, ks)
    div_vals = traj.drift.divergence(_cell_points(grid), float(traj.times[0]))
    div_plus = float(np.max(np.maximum(div_vals, 0.0)))
    k_coef = (traj.params.m - 1.0) * (c0_meas + div_plus)

    a_fit = 0.0
    lower_ok = True
    witness = None
    worst_gap = math.inf
    for k in ks:
        u = traj.pressure(k)
        ut = traj.pressure_time_derivative(k).values[sel]
        gcomps = discrete_gradient(u).components
        gsel = [g[sel] for g in gcomps]
        uval = u.values[sel]
        mu_grad = sum(m_i * g for m_i, g in zip(mu_v, gsel))
        denom = mu_grad + uval + 1.0
        good = denom > 0.0
        if good.any():
            ratios = (ut[good] - tol) / denom[good]
            a_fit = max(a_fit, float(np.max(ratios)))
        if (~good & (ut - tol > 0.0)).any():
            a_fit = math.inf
        bvals = traj.drift(pts, float(traj.times[k]))
        grad_sq = sum(g * g for g in gsel)
        grad_dot_b = sum(g * bvals[:, a] for a, g in enumerate(gsel))
        gap = ut - (grad_sq + grad_dot_b - k_coef * uval - tol)
        j = int(np.argmin(gap))
        if float(gap[j]) < worst_gap:
            worst_gap = float(gap[j])
            witness = (tuple(pts[j]), float(traj.times[k]))
        if float(gap[j]) < 0.0:
            lower_ok = False
    a_fit = max(a_fit, 0.0)
    return EstimateReport(
        name="growth-control",
        fitted={
            "A": a_fit,
            "K": k_coef,
            "C0": c0_meas,
            "sigma_eff": k_coef / (c0_meas + 1.0),
            "worst_lower_gap": worst_gap,
        },
        passed=bool(lower_ok and math.isfinite(a_fit)),
        witness=witness,
        tolerances={"tol": tol},
        resolution=dx,
    )
