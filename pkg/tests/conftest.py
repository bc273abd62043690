"""Session-scoped reference runs shared across test modules.

Each fixture is a single moderately sized forward run; everything downstream
(classification, estimates, comparison barriers) reads trajectories without
mutating them, so the runs are computed once per session.
"""

import numpy as np
import pytest

from pmefront.drift import DriftSpec
from pmefront.grids import Field, GridSpec
from pmefront.profiles import Barenblatt
from pmefront.solver import DirichletTrace, SolverParams, run


def barenblatt_field(grid: GridSpec, bb: Barenblatt, t: float) -> Field:
    pts = np.stack(grid.centers(), axis=-1) if grid.dim > 1 else grid.axis_centers(0)
    return Field(grid, bb.density(pts, t), role="density")


@pytest.fixture(scope="session")
def bb_claim_128():
    """Radial source solution, zero drift, planar grid at h = 1/128."""
    bb = Barenblatt(m=2.0, d=2, C=0.1)
    g = GridSpec(((-1.203125, 1.203125), (-1.203125, 1.203125)), (308, 308))
    rho = barenblatt_field(g, bb, 0.4)
    p = SolverParams(m=2.0, t0=0.4, t1=0.62, snapshots=55)
    traj = run(rho, DriftSpec("zero", dim=2), p)
    return bb, traj


@pytest.fixture(scope="session")
def bb_drift_128():
    """Radial initial data pushed by a constant drift (1, 0) at h = 1/128."""
    bb = Barenblatt(m=2.0, d=2, C=0.1)
    g = GridSpec(((-2.203125, 1.5), (-1.6015625, 1.6015625)), (474, 410))
    rho = barenblatt_field(g, bb, 1.0)
    p = SolverParams(m=2.0, t0=1.0, t1=1.6, snapshots=60)
    traj = run(rho, DriftSpec("constant", (1.0, 0.0)), p)
    return bb, traj


@pytest.fixture(scope="session")
def stationary_corner_coarse():
    """Corner potential flow at h = 1/128 over a quarter time unit."""
    g = GridSpec(((-0.3125, 1.3125), (-0.3125, 1.3125)), (208, 208))
    drift = DriftSpec("corner-gradient")
    x, y = g.centers()
    phi = np.maximum(np.sin(np.pi * x), 0.0) * np.maximum(np.sin(np.pi * y), 0.0)
    phi[(x <= 0.0) | (x >= 1.0) | (y <= 0.0) | (y >= 1.0)] = 0.0
    rho = Field(g, phi / 2.0, role="density")  # m = 2: rho = u/2
    p = SolverParams(m=2.0, t0=0.0, t1=0.25, snapshots=50)
    return run(rho, drift, p)


@pytest.fixture(scope="session")
def waiting_time_1d():
    """Quadratic-contact 1-D data whose endpoints initially do not move."""
    g = GridSpec(((-0.40625, 1.40625),), (464,))
    x = g.axis_centers(0)
    u0 = 16.0 * np.where((x > 0.0) & (x < 1.0), x * x * (1.0 - x) ** 2, 0.0)
    rho = Field(g, u0 / 2.0, role="density")
    p = SolverParams(m=2.0, t0=0.0, t1=0.008, snapshots=40)
    return run(rho, DriftSpec("zero", dim=1), p)


def traveling_wave_run(n: int, t1: float = 0.25):
    """Planar front dragged by a laminar shear; inflow pinned on the right.

    The y-extent is one full period of the shear so the periodic sides are
    exact; sigma1 = sup|alpha| + 1 = 2 sets the inflow growth rate.
    """
    sigma1 = 2.0
    nx = 208 * n // 128
    ny = 100 * n // 128
    g = GridSpec(
        ((-0.725, 0.9), (np.pi / 16.0, 5.0 * np.pi / 16.0)), (nx, ny)
    )
    x, _ = g.centers()
    rho0 = Field(g, np.maximum(x, 0.0) / 2.0, role="density")

    def inflow(points, t):
        u = points[:, 0] + sigma1 * t
        return np.maximum(u, 0.0) / 2.0

    p = SolverParams(
        m=2.0,
        t0=0.0,
        t1=t1,
        snapshots=50,
        boundary=(("noflux", DirichletTrace(inflow)), ("periodic", "periodic")),
    )
    return run(rho0, DriftSpec("laminar-sine", (1.0, 8.0)), p)


@pytest.fixture(scope="session")
def tw_128():
    return traveling_wave_run(128)


@pytest.fixture(scope="session")
def tw_256():
    return traveling_wave_run(256)
