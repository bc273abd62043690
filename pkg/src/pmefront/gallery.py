"""Canned free-boundary scenarios with certified comparison fields.

Each scenario packages a drift preset, an analytic initial pressure, a run
window sized so the support stays clear of the no-flux margins, and — for
the supersolution scenarios — the candidate field itself with its positive
region.  A scenario carries the list of verifier outcomes it is expected to
produce, so a driver can run it and check every claim mechanically.

Construction validates the published parameter inequalities and rejects
anything outside them; the residual certifier then gives the discrete
evidence: the candidate's operator value stays above ``-C dx`` on the
region, which is what "supersolution up to discretization" means here.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy import ndimage

from pmefront.drift import DriftSpec
from pmefront.estimates import EstimateReport
from pmefront.grids import (
    Field,
    GridSpec,
    density_from_pressure,
    discrete_gradient,
    discrete_laplacian,
    interior_mask,
)
from pmefront.solver import DirichletTrace, SolverParams, Trajectory, run

__all__ = [
    "Expectation",
    "Scenario",
    "stationary_corner",
    "shrinking_corner",
    "corner_formation",
    "cusp_case",
    "traveling_wave",
    "supersolution_residual",
    "certify",
    "bound_by_candidate",
    "run_scenario",
    "cone_edge_slope",
    "support_half_angle",
    "support_exponent",
]

#: Certification slack in cells: min residual >= -CERT_CELLS * dx passes.
CERT_CELLS = 1.0


@dataclass(frozen=True)
class Expectation:
    """One verifier the scenario is expected to satisfy, with the outcome."""

    verifier: str
    outcome: str


@dataclass(frozen=True)
class Scenario:
    """A reproducible run setup plus its analytic comparison candidate.

    ``candidate(pts, t)`` is the comparison pressure (an exact solution or a
    supersolution) and ``region(pts, t)`` its declared positive set; both are
    None only when the scenario has no pointwise candidate.  ``cert_times``
    are the times the certificate samples — they span the window on which
    the candidate's inequalities were established, which may be longer than
    the solver window (runs stop earlier so transported supports keep their
    no-flux margins).
    """

    name: str
    m: float
    drift: DriftSpec
    grid: GridSpec
    t0: float
    t1: float
    params: Mapping[str, float]
    expectations: tuple[Expectation, ...]
    pressure0: Callable[[NDArray[np.float64]], NDArray[np.float64]]
    candidate: Callable[[NDArray[np.float64], float], NDArray[np.float64]] | None
    region: Callable[[NDArray[np.float64], float], NDArray[np.bool_]] | None
    cert_times: tuple[float, ...] = ()
    boundary: tuple | None = None

    def _points(self, grid: GridSpec | None = None) -> NDArray[np.float64]:
        g = grid or self.grid
        return np.stack([c.ravel() for c in g.centers()], axis=-1)

    def initial_pressure(self) -> Field:
        vals = self.pressure0(self._points()).reshape(self.grid.shape)
        return Field(self.grid, vals)

    def initial_density(self) -> Field:
        return density_from_pressure(self.initial_pressure(), self.m)

    def candidate_pressure(self, t: float, grid: GridSpec | None = None) -> Field:
        if self.candidate is None:
            raise ValueError(f"scenario {self.name!r} has no comparison candidate")
        g = grid or self.grid
        return Field(g, self.candidate(self._points(g), t).reshape(g.shape))

    def solver_params(self, snapshots: int = 20, **overrides) -> SolverParams:
        kw = dict(m=self.m, t0=self.t0, t1=self.t1, snapshots=snapshots,
                  boundary=self.boundary)
        kw.update(overrides)
        return SolverParams(**kw)


def run_scenario(sc: Scenario, snapshots: int = 20, **overrides) -> Trajectory:
    """Forward run of the scenario's initial data over its window."""
    return run(sc.initial_density(), sc.drift, sc.solver_params(snapshots, **overrides))


# ---------------------------------------------------------------------------
# the discrete certifier


def supersolution_residual(candidate, drift: DriftSpec, m: float, times,
                           grid: GridSpec) -> float:
    """Minimum of the discrete operator over the candidate's region.

    For phi the candidate pressure, evaluates by central stencils

        L phi = phi_t - (m-1) phi lap phi - |grad phi|^2 - grad phi . b
                - (m-1) phi div b

    on the declared positive region eroded by two cells (the formulas are
    only classical there; the truncation kinks sit on the region edge) and
    clear of the box collar.  A minimum above ``-C dx`` certifies the
    candidate discretely; the time derivative is a centered difference of
    the analytic formula, so its error is negligible against the spatial
    one.
    """
    phi_fn, region_fn = candidate
    if grid.dim != 2:
        raise ValueError("certification needs a planar grid")
    pts = np.stack([c.ravel() for c in grid.centers()], axis=-1)
    h_t = 1e-4
    worst = math.inf
    for t in times:
        t = float(t)
        phi = phi_fn(pts, t).reshape(grid.shape)
        phi_t = (phi_fn(pts, t + h_t) - phi_fn(pts, t - h_t)).reshape(grid.shape)
        phi_t /= 2.0 * h_t
        f = Field(grid, phi)
        lap = discrete_laplacian(f).values
        grad = discrete_gradient(f)
        b = drift(pts, t)
        div = drift.divergence(pts, t).reshape(grid.shape)
        adv = np.zeros(grid.shape)
        g2 = np.zeros(grid.shape)
        for ax in range(grid.dim):
            adv += grad.components[ax] * b[:, ax].reshape(grid.shape)
            g2 += grad.components[ax] ** 2
        resid = phi_t - (m - 1.0) * phi * lap - g2 - adv - (m - 1.0) * phi * div
        mask = region_fn(pts, t).reshape(grid.shape)
        mask = ndimage.binary_erosion(mask, iterations=2) & interior_mask(grid, 3)
        if not mask.any():
            raise ValueError(
                f"candidate region lies outside the box at t = {t:.6g}"
            )
        worst = min(worst, float(resid[mask].min()))
    return worst


def certify(sc: Scenario, times=None, grid: GridSpec | None = None) -> EstimateReport:
    """Residual certificate for the scenario's candidate, as a report row."""
    if sc.candidate is None:
        raise ValueError(f"scenario {sc.name!r} has no comparison candidate")
    g = grid or sc.grid
    ts = tuple(times) if times is not None else sc.cert_times
    dx = max(g.dx)
    worst = supersolution_residual((sc.candidate, sc.region), sc.drift, sc.m, ts, g)
    tol = CERT_CELLS * dx
    return EstimateReport(
        name=f"{sc.name}-certificate",
        fitted={"min_residual": worst},
        passed=bool(worst >= -tol),
        witness=None,
        tolerances={"slack": tol},
        resolution=dx,
    )


def bound_by_candidate(traj: Trajectory, sc: Scenario) -> EstimateReport:
    """Check the run never exceeds the candidate, snapshot by snapshot.

    The candidate is sampled on the run's own grid and times; the tolerance
    is one cell at the candidate's density scale — the front of a monotone
    run can overshoot an analytic barrier by a single smeared cell where the
    two supports touch, and no more.
    """
    if sc.candidate is None:
        raise ValueError(f"scenario {sc.name!r} has no comparison candidate")
    grid = traj.grid
    dx = max(grid.dx)
    pts = np.stack([c.ravel() for c in grid.centers()], axis=-1)
    worst = -math.inf
    scale = 0.0
    witness = None
    for k in range(len(traj)):
        t = float(traj.times[k])
        rho_c = density_from_pressure(
            Field(grid, sc.candidate(pts, t).reshape(grid.shape)), sc.m
        ).values
        scale = max(scale, float(rho_c.max()))
        diff = traj.snapshots[k].rho - rho_c
        v = float(diff.max())
        if v > worst:
            worst = v
            idx = np.unravel_index(int(np.argmax(diff)), diff.shape)
            witness = (tuple(float(c[idx]) for c in grid.centers()), t)
    tol = dx * scale
    return EstimateReport(
        name=f"{sc.name}-ordering",
        fitted={"max_violation": worst, "candidate_scale": scale},
        passed=bool(worst <= tol),
        witness=witness,
        tolerances={"tol": tol},
        resolution=dx,
    )


# ---------------------------------------------------------------------------
# support-geometry probes


def _positive_columns(u: Field, threshold_rel: float):
    thr = threshold_rel * float(u.values.max())
    xs, ys = u.grid.centers()
    return u.values > thr, xs, ys


def cone_edge_slope(u: Field, y_window=(0.2, 0.8), threshold_rel: float = 1e-3) -> float:
    """Median slope a of the lower support edge x = a |y| over the window.

    The threshold rides above the advected toe (a relative 1e-3 level) so
    the fit sees the bulk front, not the numerical skirt.
    """
    pos, xs, ys = _positive_columns(u, threshold_rel)
    slopes = []
    for j in range(u.grid.shape[1]):
        yv = ys[0, j]
        if y_window[0] <= abs(yv) <= y_window[1] and pos[:, j].any():
            slopes.append(float(xs[pos[:, j], j].min()) / abs(yv))
    if len(slopes) < 4:
        raise ValueError("support does not cross the fit window")
    return float(np.median(slopes))


def support_half_angle(u: Field, x_window=(0.3, 0.7), threshold_rel: float = 1e-8) -> float:
    """Half-opening (radians) of a support cone around the +x axis."""
    pos, xs, ys = _positive_columns(u, threshold_rel)
    slopes = []
    for i in range(u.grid.shape[0]):
        xv = xs[i, 0]
        if x_window[0] <= xv <= x_window[1] and pos[i].any():
            slopes.append(float(np.abs(ys[i][pos[i]]).max()) / xv)
    if len(slopes) < 4:
        raise ValueError("support does not cross the fit window")
    return math.atan(float(np.median(slopes)))


def support_exponent(u: Field, eps: float, y_window=(0.05, 0.5),
                     threshold_rel: float = 1e-8) -> float:
    """Exponent p of a lower support edge x = (|y| + eps)^p, by log-log fit."""
    pos, xs, ys = _positive_columns(u, threshold_rel)
    lx, ly = [], []
    for j in range(u.grid.shape[1]):
        yv = ys[0, j]
        if y_window[0] <= abs(yv) <= y_window[1] and pos[:, j].any():
            x_edge = float(xs[pos[:, j], j].min())
            if x_edge > 0.0:
                lx.append(math.log(x_edge))
                ly.append(math.log(abs(yv) + eps))
    if len(lx) < 4:
        raise ValueError("support does not cross the fit window")
    return float(np.polyfit(ly, lx, 1)[0])


# ---------------------------------------------------------------------------
# scenario constructors


def _grid(bounds, resolution: int) -> GridSpec:
    cells = tuple(int(round((hi - lo) * resolution)) for lo, hi in bounds)
    return GridSpec(bounds, cells)


def stationary_corner(resolution: int = 128) -> Scenario:
    """Potential flow whose pressure is an exact standing solution.

    u = g(x) g(y) with g = sin(pi s) on (0, 1) and b = -grad u: the operator
    cancels term by term, the support is exactly the unit square, and the
    front never moves — the corners stand still with a 90-degree opening.
    """

    def phi(pts, t=0.0):
        gx = np.where((pts[:, 0] > 0) & (pts[:, 0] < 1), np.sin(np.pi * pts[:, 0]), 0.0)
        gy = np.where((pts[:, 1] > 0) & (pts[:, 1] < 1), np.sin(np.pi * pts[:, 1]), 0.0)
        return np.maximum(gx * gy, 0.0)

    def region(pts, t):
        return (
            (pts[:, 0] > 0) & (pts[:, 0] < 1) & (pts[:, 1] > 0) & (pts[:, 1] < 1)
        )

    return Scenario(
        name="stationary-corner",
        m=2.0,
        drift=DriftSpec("corner-gradient"),
        grid=_grid(((-0.3125, 1.3125), (-0.3125, 1.3125)), resolution),
        t0=0.0,
        t1=0.25,
        params={},
        expectations=(
            Expectation("certificate", "residual vanishes to O(dx^2)"),
            Expectation("ordering", "run tracks the standing profile"),
            Expectation("front_velocity", "front speed vanishes within tolerance"),
            Expectation("classify_fb_point", "TypeOne"),
            Expectation("corner_angle", "90 degrees within 2 at the origin"),
        ),
        pressure0=phi,
        candidate=phi,
        region=region,
        cert_times=(0.0, 0.1),
    )


def shrinking_corner(resolution: int = 128, a: float = 0.0, b: float = 17.0,
                     k0: float = 1.0, sigma1: float = 30.0) -> Scenario:
    """Corner supersolution whose half-angle arctan(k(t)^{-1/2}) narrows.

    phi = e^{sigma1 t} (x^2 - k0 e^t y^2)_+ on x > 0 under b = (a x, b y);
    admissible while 2b - 1 >= 4 lam + 8 lam k0 + 2a with lam = e^{sigma1 t}
    <= e on the window t <= 1/sigma1, which the constructor enforces.
    """
    if sigma1 < 10.0:
        raise ValueError(f"sigma1 = {sigma1:g} is under the floor 10")
    if k0 <= 0.0:
        raise ValueError("k0 must be positive")
    lam_max = math.e  # sigma1 * t <= 1 on the window
    need = 4.0 * lam_max + 8.0 * lam_max * k0 + 2.0 * a
    if 2.0 * b - 1.0 < need:
        raise ValueError(
            f"drift growth too weak: 2b-1 = {2 * b - 1:g} < {need:g}"
        )

    def phi(pts, t):
        lam = math.exp(sigma1 * t)
        k = k0 * math.exp(t)
        val = pts[:, 0] ** 2 - k * pts[:, 1] ** 2
        return np.where((pts[:, 0] > 0) & (val > 0), lam * val, 0.0)

    def region(pts, t):
        k = k0 * math.exp(t)
        return pts[:, 0] > math.sqrt(k) * np.abs(pts[:, 1])

    def u0(pts):
        # a bump strictly inside the t=0 cone, capped by the candidate
        bump = np.maximum(0.09 - (pts[:, 0] - 0.4) ** 2 - pts[:, 1] ** 2, 0.0)
        return 0.8 * np.minimum(phi(pts, 0.0), bump)

    t1 = 1.0 / sigma1
    return Scenario(
        name="shrinking-corner",
        m=2.0,
        drift=DriftSpec("linear-diagonal", (a, b)),
        grid=_grid(((-0.25, 1.25), (-0.75, 0.75)), resolution),
        t0=0.0,
        t1=t1,
        params={"a": a, "b": b, "k0": k0, "sigma1": sigma1},
        expectations=(
            Expectation("certificate", "residual above -C dx on the cone"),
            Expectation("ordering", "run stays below the candidate"),
            Expectation("half_angle", "arctan(k(t)^{-1/2}) within 3 degrees"),
        ),
        pressure0=u0,
        candidate=phi,
        region=region,
        cert_times=(1e-3, 0.01, t1),
    )


def corner_formation(resolution: int = 64, sigma0: float | None = None,
                     eps: float = 0.25, m: float = 2.0) -> Scenario:
    """Half-plane front that a folding drift squeezes into a corner.

    phi = sigma0 e^{4 m t} x (x - eps t |y|)_+ under b = -(x + |y|, y).  At
    t = 0 the support edge is the straight line x = 0; for t > 0 the edge
    of the run is transported to x = t |y| (the pressure is too small to
    compete), while the candidate confines it to x > eps t |y|.
    """
    if m <= 1.0:
        raise ValueError("m must exceed 1")
    cap = math.exp(-4.0 * m) / 2.0
    if sigma0 is None:
        sigma0 = cap
    if not 0.0 < sigma0 <= cap:
        raise ValueError(f"sigma0 = {sigma0:g} outside (0, {cap:g}]")
    if not 0.0 < eps <= 0.25:
        raise ValueError(f"eps = {eps:g} outside (0, 0.25]")
    s0, ef, mm = float(sigma0), float(eps), float(m)

    def phi(pts, t):
        lam = s0 * math.exp(4.0 * mm * t)
        val = pts[:, 0] - ef * t * np.abs(pts[:, 1])
        return np.where((val > 0) & (pts[:, 0] > 0), lam * pts[:, 0] * val, 0.0)

    def region(pts, t):
        return (pts[:, 0] > 0) & (pts[:, 0] > ef * t * np.abs(pts[:, 1]))

    def u0(pts):
        inside = pts[:, 0] ** 2 + pts[:, 1] ** 2 < 1.0
        return phi(pts, 0.0) * inside

    return Scenario(
        name="corner-formation",
        m=mm,
        drift=DriftSpec("corner-formation"),
        # the drift transports the unit half-disc out to |y| ~ e^t plus an
        # advected toe; this box holds the margin through t = 0.35
        grid=_grid(((-0.75, 3.0), (-2.75, 2.75)), resolution),
        t0=0.0,
        t1=0.35,
        params={"sigma0": s0, "eps": ef, "sigma1": 4.0 * mm},
        expectations=(
            Expectation("certificate", "residual above -C dx on the cone"),
            Expectation("ordering", "run stays below the candidate"),
            Expectation("edge_slope", "support edge x = t|y| after onset"),
            Expectation("cone_angle_scan", "opening angle stalls after onset"),
        ),
        pressure0=u0,
        candidate=phi,
        region=region,
        cert_times=(0.0, 0.5, 1.0),
    )


def cusp_case(resolution: int = 128, tau: float = 0.3, delta: float = 0.5,
              eps: float = 0.05, sigma2: float = 1.0) -> Scenario:
    """Supersolution whose support edge sharpens from a corner to a cusp.

    phi = e^{sigma2 t} (x^2 - (|y| + eps)^{2 alpha(t)})_+ with alpha =
    1 + tau (tau - t): the edge exponent passes through 1 exactly at
    t = tau.  The drift's first component x log x - 10 x^{1-delta} is not
    Lipschitz at 0, so it is clamped to zero within one cell of x = 0;
    the declared region never touches that strip.
    """
    if not 0.0 < tau <= 0.5:
        raise ValueError(f"tau = {tau:g} outside (0, 1/2]")
    floor = 2.0 * tau * tau / (1.0 - tau * tau)
    if not floor <= delta < 1.0:
        raise ValueError(f"delta = {delta:g} outside [{floor:g}, 1)")
    if sigma2 <= 0.0 or math.exp(2.0 * sigma2 * tau) > 2.0:
        raise ValueError(f"sigma2 = {sigma2:g} breaks e^(2 sigma2 tau) <= 2")
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    dx = 1.0 / resolution

    def alpha(t):
        return 1.0 + tau * (tau - t)

    def phi(pts, t):
        lam = math.exp(sigma2 * t)
        val = pts[:, 0] ** 2 - (np.abs(pts[:, 1]) + eps) ** (2.0 * alpha(t))
        return np.where((pts[:, 0] >= 0) & (val > 0), lam * val, 0.0)

    def region(pts, t):
        edge = (np.abs(pts[:, 1]) + eps) ** (2.0 * alpha(t))
        return (pts[:, 0] >= 0) & (pts[:, 0] ** 2 > edge)

    def u0(pts):
        bump = np.maximum(0.05 - (pts[:, 0] - 0.6) ** 2 - pts[:, 1] ** 2, 0.0)
        return 0.8 * np.minimum(phi(pts, 0.0), bump)

    return Scenario(
        name="cusp",
        m=2.0,
        drift=DriftSpec("cusp", (delta, dx)),
        # the drift slings mass to larger x at speed ~ 10 sqrt(x): the box
        # and short window keep the right-face margin
        grid=_grid(((-0.25, 1.75), (-0.75, 0.75)), resolution),
        t0=0.0,
        t1=0.03,
        params={"tau": tau, "delta": delta, "eps": eps, "sigma2": sigma2},
        expectations=(
            Expectation("certificate", "residual above -C dx on the region"),
            Expectation("ordering", "run stays below the candidate"),
            Expectation("contour_exponent", "edge exponent alpha(t) within 5%"),
            Expectation("cusp_onset", "alpha(tau) equals one"),
        ),
        pressure0=u0,
        candidate=phi,
        region=region,
        cert_times=(0.0, 0.15, tau),
    )


def traveling_wave(resolution: int = 128, amp: float = 1.0,
                   freq: float = 8.0) -> Scenario:
    """Planar front dragged by the laminar shear b = (amp sin(freq y), 0).

    u0 = (x)_+ with the inflow u = x + sigma1 t pinned on the right face,
    sigma1 = sup|alpha| + 1; the linear barrier (x + sigma1 t)_+ dominates
    every snapshot.  The y-extent is one shear period so the periodic sides
    are exact.
    """
    if amp <= 0.0 or freq <= 0.0:
        raise ValueError("shear amplitude and frequency must be positive")
    sigma1 = amp + 1.0
    sigma2 = amp * freq
    period = 2.0 * math.pi / freq
    y_lo = 0.5 * math.pi / freq
    nx = int(round(1.625 * resolution))
    ny = int(round(period * resolution))
    grid = GridSpec(((-0.725, 0.9), (y_lo, y_lo + period)), (nx, ny))

    def phi(pts, t):
        return np.maximum(pts[:, 0] + sigma1 * t, 0.0)

    def region(pts, t):
        return pts[:, 0] + sigma1 * t > 0

    def u0(pts):
        return np.maximum(pts[:, 0], 0.0)

    def inflow(points, t):
        u = points[:, 0] + sigma1 * t
        return np.maximum(u, 0.0) / 2.0  # m = 2: rho = u/2

    return Scenario(
        name="traveling-wave",
        m=2.0,
        drift=DriftSpec("laminar-sine", (amp, freq)),
        grid=grid,
        t0=0.0,
        t1=0.25,
        params={"amp": amp, "freq": freq, "sigma1": sigma1, "sigma2": sigma2},
        expectations=(
            Expectation("certificate", "barrier residual non-negative"),
            Expectation("ordering", "run stays below the linear barrier"),
            Expectation("cone", "monotone within tan(arcsin(e^{-sigma2 T}))"),
            Expectation("grad_floor", "directional slope floor positive"),
            Expectation("lipschitz", "front graph slope stable under refinement"),
        ),
        pressure0=u0,
        candidate=phi,
        region=region,
        cert_times=(0.0, 0.1, 0.25),
        boundary=(("noflux", DirichletTrace(inflow)), ("periodic", "periodic")),
    )
