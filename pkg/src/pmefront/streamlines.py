"""Characteristic curves of the drift and what they say about the front.

The transported point solves dX/dt = -b(X, t0 + t): mass rides against the
drift, so streamlines here are the curves that carry the positivity set.
Built on top of that ODE are three diagnostics:

* `check_support_consistency` — points inside the support stay inside after
  riding a streamline for a short time, with a quantified exponential floor
  on the pressure they keep;
* `classify_fb_point` — the front-point dichotomy: either the point sits on
  a streamline of earlier front points (type one), or an expanding vacuum
  ball trails behind it (type two);
* `fb_normal_velocity` — measured normal front speed against the velocity
  law |grad u| - b.n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy import ndimage

from .drift import DriftSpec
from .grids import (
    DEFAULT_THRESHOLD_REL,
    Field,
    GridSpec,
    discrete_gradient,
    discrete_laplacian,
    interior_mask,
    sample_linear,
)
from .solver import Trajectory

__all__ = [
    "StreamlinePath",
    "FBClassification",
    "ConsistencyReport",
    "FrontVelocity",
    "integrate_streamline",
    "check_support_consistency",
    "classify_fb_point",
    "fb_normal_velocity",
]


# --------------------------------------------------------------------------
# streamline integration
# --------------------------------------------------------------------------


@dataclass
class StreamlinePath:
    """One integrated streamline: times are offsets s from the anchor time."""

    anchor_point: NDArray[np.float64]
    anchor_time: float
    times: NDArray[np.float64]
    positions: NDArray[np.float64]
    h_ode: float
    truncated: bool = False

    def __post_init__(self) -> None:
        if not np.array_equal(self.positions[0], self.anchor_point):
            raise ValueError("path must start exactly at the anchor point")
        if not np.all(np.isfinite(self.positions)):
            raise ValueError("streamline positions must be finite")

    @property
    def end(self) -> NDArray[np.float64]:
        return self.positions[-1]


def _rk4_batch(
    points: NDArray[np.float64],
    t0: float,
    s: float,
    drift: DriftSpec,
    h_ode: float,
) -> NDArray[np.float64]:
    """Advance a batch of points through dX/dt = -b(X, t0+t) up to time s.

    s may be negative (backwards in time); the step count is chosen so the
    signed step never exceeds h_ode in magnitude.
    """
    x = np.array(points, dtype=float)
    if s == 0.0:
        return x
    n = max(1, int(math.ceil(abs(s) / h_ode)))
    h = s / n
    tau = 0.0
    for _ in range(n):
        k1 = -drift(x, t0 + tau)
        k2 = -drift(x + 0.5 * h * k1, t0 + tau + 0.5 * h)
        k3 = -drift(x + 0.5 * h * k2, t0 + tau + 0.5 * h)
        k4 = -drift(x + h * k3, t0 + tau + h)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        tau += h
    return x


def integrate_streamline(
    x0,
    t0: float,
    s: float,
    drift: DriftSpec,
    h_ode: float,
    box: GridSpec | None = None,
) -> StreamlinePath:
    """Integrate dX/dt = -b(X, t0+t) from X(0)=x0 out to offset s (RK4).

    With a box, integration stops at the first sample that leaves it and the
    path is flagged truncated instead of raising.
    """
    if h_ode <= 0.0:
        raise ValueError("h_ode must be positive")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.shape != (drift.dim,):
        raise ValueError(f"anchor point must have shape ({drift.dim},)")
    n = max(1, int(math.ceil(abs(s) / h_ode))) if s != 0.0 else 0
    times = [0.0]
    positions = [x0.copy()]
    truncated = False
    x = x0[None, :].copy()
    for j in range(n):
        h = s / n
        x = _rk4_batch(x, t0 + j * h, h, drift, h_ode=abs(h))
        if box is not None and not box.contains(x[0]):
            truncated = True
            break
        times.append((j + 1) * h)
        positions.append(x[0].copy())
    path = StreamlinePath(
        anchor_point=x0,
        anchor_time=float(t0),
        times=np.array(times),
        positions=np.array(positions),
        h_ode=float(h_ode),
        truncated=truncated,
    )
    return path


# --------------------------------------------------------------------------
# support consistency along streamlines
# --------------------------------------------------------------------------


@dataclass
class ConsistencyReport:
    """Outcome of the streamline support check, with the worst witness."""

    passed: bool
    s: float
    c0: float
    decay_rate: float        # C in the floor exp(-C s) u
    semiconvexity: float     # measured sup of (-lap u)_+
    tolerance: float
    n_times: int
    n_points: int
    worst_margin: float      # min of u(X, t+s) - floor over all checks
    witness_point: NDArray[np.float64] | None = None
    witness_time: float | None = None
    failure_kind: str | None = None  # "positivity" | "floor"


def check_support_consistency(
    traj: Trajectory,
    s: float,
    h_ode: float | None = None,
    time_stride: int = 1,
) -> ConsistencyReport:
    """Ride every interior support cell along its streamline for time s.

    Checks, for each snapshot time t with t+s in range and each cell x at
    least two cells inside the positivity set, that u(X(x,t;s), t+s) > 0 and
    that u(X(x,t;s), t+s) >= exp(-C s) u(x,t) - tol where
    C = (m-1)(C0 + sup div b) and C0 is the measured semiconvexity constant
    sup (-lap u)_+ over the trajectory interior.  tol = 10 dx.
    """
    if s <= 0.0:
        raise ValueError("s must be positive")
    grid = traj.grid
    bounds = grid.bounds
    b_sup = traj.drift.sup_norm(bounds, t=float(traj.times[0]))
    c0 = 1.0 / (2.0 * (1.0 + b_sup))
    if s > c0 + 1e-12:
        raise ValueError(f"s must not exceed c0 = {c0:.6g} (got {s})")
    div_sup = traj.drift.sup_divergence(bounds, t=float(traj.times[0]))
    m = traj.params.m
    tol = 10.0 * max(grid.dx)
    h = h_ode if h_ode is not None else s / 16.0

    t_end = float(traj.times[-1])
    idxs = [
        k
        for k in range(0, len(traj), max(1, time_stride))
        if traj.times[k] + s <= t_end + 1e-12
    ]
    if not idxs:
        raise ValueError("no snapshot has t + s inside the trajectory window")

    inner = interior_mask(grid, collar=2)
    centers = grid.centers()
    pts_all = np.stack([c.ravel() for c in centers], axis=-1)

    # measured semiconvexity constant over the checked snapshots
    semi = 0.0
    for k in idxs:
        u = traj.pressure(k)
        mask = u.values > DEFAULT_THRESHOLD_REL * u.values.max()
        core = ndimage.binary_erosion(mask, iterations=2) & inner
        if not core.any():
            continue
        lap = discrete_laplacian(u).values
        semi = max(semi, float(np.max(-lap[core], initial=0.0)))
    decay = (m - 1.0) * (semi + max(div_sup, 0.0))

    worst = math.inf
    witness_pt = None
    witness_t = None
    kind = None
    n_points = 0
    for k in idxs:
        t_k = float(traj.times[k])
        u = traj.pressure(k)
        mask = u.values > DEFAULT_THRESHOLD_REL * u.values.max()
        core = ndimage.binary_erosion(mask, iterations=2) & inner
        if not core.any():
            continue
        src = pts_all[core.ravel()]
        u_src = u.values[core]
        n_points += len(src)
        moved = _rk4_batch(src, t_k, s, traj.drift, h)
        u_dst = traj.sample_pressure(moved, t_k + s)
        floor = math.exp(-decay * s) * u_src - tol
        margin = u_dst - floor
        j = int(np.argmin(margin))
        if margin[j] < worst:
            worst = float(margin[j])
        bad_pos = u_dst <= 0.0
        bad_floor = margin < 0.0
        if bad_pos.any() or bad_floor.any():
            j = int(np.argmax(bad_pos)) if bad_pos.any() else int(np.argmax(bad_floor))
            witness_pt = src[j]
            witness_t = t_k
            kind = "positivity" if bad_pos.any() else "floor"
            return ConsistencyReport(
                passed=False,
                s=s,
                c0=c0,
                decay_rate=decay,
                semiconvexity=semi,
                tolerance=tol,
                n_times=len(idxs),
                n_points=n_points,
                worst_margin=worst,
                witness_point=witness_pt,
                witness_time=witness_t,
                failure_kind=kind,
            )
    return ConsistencyReport(
        passed=True,
        s=s,
        c0=c0,
        decay_rate=decay,
        semiconvexity=semi,
        tolerance=tol,
        n_times=len(idxs),
        n_points=n_points,
        worst_margin=worst,
    )


# --------------------------------------------------------------------------
# front point classification
# --------------------------------------------------------------------------


@dataclass
class EvidenceRow:
    s: float
    radius: float
    skipped: bool
    backward_empty: bool
    forward_positive: bool


@dataclass
class FBClassification:
    """Verdict for one front point with the fitted expansion constants."""

    point: NDArray[np.float64]
    t0: float
    verdict: str  # "TypeOne" | "TypeTwo" | "Inconclusive"
    c_star: float
    beta: float
    h: float
    evidence: list[EvidenceRow] = field(default_factory=list)

    def format_record(self) -> str:
        pt = ", ".join(f"{v:.6g}" for v in np.atleast_1d(self.point))
        lines = [
            f"point: ({pt})  t0: {self.t0:.6g}",
            f"verdict: {self.verdict}",
            f"C*: {self.c_star:.6g}  beta: {self.beta:.6g}  h: {self.h:.6g}",
            "s        radius   skip  empty-behind  positive-ahead",
        ]
        for row in self.evidence:
            lines.append(
                f"{row.s:<8.4g} {row.radius:<8.4g} {str(row.skipped):<5} "
                f"{str(row.backward_empty):<13} {str(row.forward_positive)}"
            )
        return "\n".join(lines)


_BETA_GRID = [0.55 + 0.05 * i for i in range(50)]  # 0.55, 0.60, ..., 3.00


def _contour_distance(traj: Trajectory, k: int, point: NDArray[np.float64]) -> float:
    """Distance from a point to the stored front polylines at snapshot k."""
    polys = traj.contour(k)
    if not polys:
        return math.inf
    # entries are (n, dim) vertex arrays in either dimension
    best = math.inf
    for poly in polys:
        d = np.min(np.linalg.norm(poly - point[None, :], axis=1))
        best = min(best, float(d))
    return best


def _critical_radii(
    traj: Trajectory, k: int, center: NDArray[np.float64]
) -> tuple[float, float]:
    """Largest empty-ball and positive-ball radii about a point at snapshot k.

    A ball is empty while it contains no cell above threshold, and positive
    while it contains no cell at or below threshold, so both caps are nearest
    cell-center distances; every radius query reduces to comparisons against
    these two numbers.
    """
    grid = traj.grid
    u = traj.pressure(k).values
    thr = DEFAULT_THRESHOLD_REL * u.max()
    if grid.dim == 1:
        dist = np.abs(grid.axis_centers(0) - center[0])
    else:
        x, y = grid.centers()
        dist = np.hypot(x - center[0], y - center[1])
    pos = u > thr
    r_empty = float(dist[pos].min()) if pos.any() else math.inf
    r_positive = float(dist[~pos].min()) if (~pos).any() else math.inf
    return r_empty, r_positive


def classify_fb_point(
    traj: Trajectory,
    x0,
    t0: float,
    s_samples: list[float],
    ball_scale: float = 1.0,
    h_ode: float | None = None,
) -> FBClassification:
    """Decide whether a front point trails an expanding vacuum ball.

    For each backward offset s the test centers a ball of radius C* s^beta on
    X(x0,t0;-s) and asks the earlier field to vanish on it, and a matching
    ball on X(x0,t0;+s) and asks the later field to be positive on it.  Both
    tests are monotone in the radius, so each s yields one critical radius
    r_ok(s) below which the pair passes; fitting (C*, beta) is then pure
    arithmetic against those caps.  Balls thinner than two cells are skipped
    as unresolvable.  If no pair certifies every usable s, the point is
    declared type one when its backward streamline never strays more than a
    cell from the front, and inconclusive otherwise.
    """
    grid = traj.grid
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.size != grid.dim:
        raise ValueError(f"x0 must be a {grid.dim}-vector")
    s_samples = sorted(float(s) for s in s_samples)
    if not s_samples or s_samples[0] <= 0.0:
        raise ValueError("s_samples must be positive offsets")
    dx = max(grid.dx)
    r_min = 2.0 * dx  # thinner balls contain too few cells to witness anything
    k0 = traj.index_at(t0)
    if abs(traj.times[k0] - t0) > 0.5 * max(np.diff(traj.times).max(), 1e-30):
        raise ValueError("t0 is not near any stored snapshot time")
    if _contour_distance(traj, k0, x0) > dx:
        raise ValueError("point is not within one cell of the front")

    h = h_ode if h_ode is not None else min(s_samples) / 16.0
    back = {s: _rk4_batch(x0[None, :], t0, -s, traj.drift, h)[0] for s in s_samples}
    fwd = {s: _rk4_batch(x0[None, :], t0, s, traj.drift, h)[0] for s in s_samples}
    k_back = {s: traj.index_at(t0 - s) for s in s_samples}
    k_fwd = {s: traj.index_at(t0 + s) for s in s_samples}
    r_ok = {}
    for s in s_samples:
        re_b, _ = _critical_radii(traj, k_back[s], back[s])
        _, rp_f = _critical_radii(traj, k_fwd[s], fwd[s])
        # strict: the ball must stay strictly inside both caps
        r_ok[s] = min(re_b, rp_f) * (1.0 - 1e-12) - 1e-300

    def rows_for(c_star: float, beta: float) -> list[EvidenceRow]:
        rows = []
        for s in s_samples:
            r = c_star * s**beta
            if r < r_min:
                rows.append(EvidenceRow(s, r, True, False, False))
                continue
            re_b, _ = _critical_radii(traj, k_back[s], back[s])
            _, rp_f = _critical_radii(traj, k_fwd[s], fwd[s])
            rows.append(EvidenceRow(s, r, False, r < re_b, r < rp_f))
        return rows

    def score(c_star: float, beta: float) -> tuple[int, float]:
        """(usable row count when every usable row passes else 0, largest s)."""
        n_usable, n_ok, h_pass = 0, 0, 0.0
        for s in s_samples:
            r = c_star * s**beta
            if r < r_min:
                continue
            n_usable += 1
            if r <= r_ok[s]:
                n_ok += 1
                h_pass = max(h_pass, s)
        if n_ok == 0 or n_ok < n_usable:
            return 0, 0.0
        return n_ok, h_pass

    cap = ball_scale * math.sqrt(sum((b - a) ** 2 for a, b in grid.bounds))
    best = None  # key (n_pass, h, -beta, c*)
    for beta in _BETA_GRID:
        # score is piecewise in C*: breakpoints where a cap binds or a row
        # drops below the resolvable radius
        cands = {r_ok[s] / s**beta for s in s_samples}
        cands |= {r_min / s**beta * (1.0 - 1e-12) for s in s_samples}
        for c_star in cands:
            if not 0.0 < c_star <= cap:
                continue
            n_pass, h_pass = score(c_star, beta)
            if n_pass == 0:
                continue
            key = (n_pass, h_pass, -beta, c_star)
            if best is None or key > best:
                best = key

    if best is not None:
        n_pass, h_pass, neg_beta, c_star = best
        beta = -neg_beta
        rows = rows_for(c_star, beta)
        return FBClassification(x0, float(t0), "TypeTwo", c_star, beta, h_pass, rows)
    # no certifying pair: record the evidence at the smallest resolvable radii
    beta = 1.0
    c_star = r_min / min(s_samples)
    rows = rows_for(c_star, beta)
    c_star, beta, h_pass = 0.0, 0.0, 0.0

    # type one: the backward streamline hugs the earlier front
    hugs = True
    for s in s_samples:
        if t0 - s < traj.times[0] - 1e-12:
            continue
        if _contour_distance(traj, k_back[s], back[s]) > dx:
            hugs = False
            break
    verdict = "TypeOne" if hugs else "Inconclusive"
    return FBClassification(x0, float(t0), verdict, c_star, beta, h_pass, rows)


# --------------------------------------------------------------------------
# measured front speed vs the velocity law
# --------------------------------------------------------------------------


@dataclass
class FrontVelocity:
    v_measured: float
    v_law: float
    inconclusive: bool = False
    note: str = ""
    samples: list[tuple[float, float]] = field(default_factory=list)


def _contour_normal(
    traj: Trajectory, k: int, point: NDArray[np.float64], threshold_rel: float
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Nearest contour vertex and outward unit normal there."""
    polys = traj.contour(k, threshold_rel)
    best = (math.inf, None, None)
    for poly in polys:
        d = np.linalg.norm(poly - point[None, :], axis=1)
        j = int(np.argmin(d))
        if d[j] < best[0]:
            best = (float(d[j]), poly, j)
    _, poly, j = best
    if poly is None:
        raise ValueError("no front found at the requested time")
    a = poly[max(j - 1, 0)]
    b = poly[min(j + 1, len(poly) - 1)]
    tangent = b - a
    norm = np.linalg.norm(tangent)
    if norm == 0.0:
        raise ValueError("degenerate front segment")
    n = np.array([tangent[1], -tangent[0]]) / norm
    # orient outward: pressure must drop along +n
    u = traj.pressure(k)
    dx = max(traj.grid.dx)
    ahead = sample_linear(u, (poly[j] + 0.75 * dx * n)[None, :])[0]
    behind = sample_linear(u, (poly[j] - 0.75 * dx * n)[None, :])[0]
    if ahead > behind:
        n = -n
    return poly[j], n


def _front_offset_along_ray(
    traj: Trajectory,
    k: int,
    origin: NDArray[np.float64],
    n: NDArray[np.float64],
    r_max: float,
    threshold_rel: float,
) -> float | None:
    """Signed distance from origin to the front along direction n."""
    u = traj.pressure(k)
    thr = threshold_rel * u.values.max()
    dx = max(traj.grid.dx)
    rs = np.arange(-3.0 * dx, r_max, 0.25 * dx)
    vals = sample_linear(u, origin[None, :] + rs[:, None] * n[None, :]) - thr
    sign_change = np.nonzero((vals[:-1] > 0.0) & (vals[1:] <= 0.0))[0]
    if len(sign_change) == 0:
        return None
    i = int(sign_change[0])
    lo, hi = rs[i], rs[i + 1]
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        v = sample_linear(u, (origin + mid * n)[None, :])[0] - thr
        if v > 0.0:
            lo = mid
        else:
            hi = mid
    return float(0.5 * (lo + hi))


def fb_normal_velocity(
    traj: Trajectory, point: tuple, window: int = 8,
    threshold_rel: float = DEFAULT_THRESHOLD_REL,
) -> FrontVelocity:
    """Front speed at a point: contour displacement vs |grad u| - b.n.

    `point` is the (x, t) pair anchoring the measurement.  The measured value
    is the slope of the front offset along the outward normal across the next
    `window` snapshots; the law is evaluated one cell inside the support.

    `threshold_rel` sets the level the front is extracted at.  The default
    tracks bare support, whose outermost crossing rides the smeared toe of
    the discrete profile; speed measurements are less biased a few grid
    errors up, i.e. threshold_rel of order dx.
    """
    if traj.grid.dim != 2:
        raise ValueError("front velocity measurement needs a planar run")
    x_anchor, t0 = point
    x_anchor = np.atleast_1d(np.asarray(x_anchor, dtype=float))
    k0 = traj.index_at(t0)
    if k0 + window >= len(traj):
        raise ValueError("window runs past the last snapshot")
    v0, n = _contour_normal(traj, k0, x_anchor, threshold_rel)
    n_polys = len(traj.contour(k0, threshold_rel))

    dxs = traj.grid.dx
    r_max = 0.45 * min(b - a for a, b in traj.grid.bounds)
    ts = [0.0]
    rs = [0.0]
    for j in range(1, window + 1):
        if len(traj.contour(k0 + j, threshold_rel)) != n_polys:
            return FrontVelocity(
                math.nan, math.nan, inconclusive=True, note="front topology changed"
            )
        r = _front_offset_along_ray(traj, k0 + j, v0, n, r_max, threshold_rel)
        if r is None:
            return FrontVelocity(
                math.nan, math.nan, inconclusive=True, note="front left the ray"
            )
        ts.append(float(traj.times[k0 + j] - traj.times[k0]))
        rs.append(r)
    tarr = np.array(ts)
    rarr = np.array(rs)
    v_measured = float(np.sum(tarr * rarr) / np.sum(tarr * tarr))

    x_in = v0 - max(dxs) * n
    u0 = traj.pressure(k0)
    grad_comps = discrete_gradient(u0).components
    grad = np.array(
        [
            sample_linear(Field(u0.grid, g, role="scalar"), x_in[None, :])[0]
            for g in grad_comps
        ]
    )
    b_val = traj.drift(x_in[None, :], float(traj.times[k0]))[0]
    v_law = float(np.linalg.norm(grad) - np.dot(b_val, n))
    return FrontVelocity(
        v_measured, v_law, samples=list(zip(ts, rs))
    )
