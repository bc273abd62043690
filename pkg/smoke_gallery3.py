"""Corner-formation (resized box, T=0.5) + cusp run + geometry fits."""
import math
import time

import numpy as np

from pmefront.drift import DriftSpec
from pmefront.grids import Field, GridSpec
from pmefront.solver import SolverParams, run

M = 2.0

def box(bounds, res):
    cells = tuple(int(round((hi - lo) * res)) for lo, hi in bounds)
    return GridSpec(bounds, cells)

def violation(traj, phi_fn):
    pts = np.stack([c.ravel() for c in traj.grid.centers()], axis=-1)
    worst = -math.inf
    for k, t in enumerate(traj.times):
        rho_phi = phi_fn(pts, float(t)).reshape(traj.grid.shape) / 2.0
        worst = max(worst, float((traj.snapshots[k].rho - rho_phi).max()))
    return worst

S0, EPSF = math.exp(-8.0) / 2.0, 0.25
def cf_phi(pts, t):
    lam = S0 * math.exp(4.0 * M * t)
    al = EPSF * t
    val = pts[:, 0] - al * np.abs(pts[:, 1])
    return np.where(val > 0, lam * pts[:, 0] * val, 0.0) * (pts[:, 0] > 0)

for res in (64, 128):
    g = box(((-0.5, 2.0), (-1.8125, 1.8125)), res)
    pts = np.stack([c.ravel() for c in g.centers()], axis=-1)
    u0 = cf_phi(pts, 0.0) * (pts[:, 0] ** 2 + pts[:, 1] ** 2 < 1.0)
    t0 = time.time()
    traj = run(Field(g, u0.reshape(g.shape) / 2.0, role="density"),
               DriftSpec("corner-formation"),
               SolverParams(m=M, t0=0.0, t1=0.5, snapshots=10))
    v = violation(traj, cf_phi)
    phimax = cf_phi(pts, 0.5).max()
    print(f"formation res={res}: viol={v:.3g} rel={v/(phimax/2):.3g} [{time.time()-t0:.1f}s]")

    # run support edge slope near origin at t=0.5: transport predicts x = t|y|
    xs, ys = g.centers()
    kq = traj.index_at(0.5)
    rho = traj.snapshots[kq].rho
    thr = 1e-8 * rho.max()
    slopes = []
    for j in range(g.shape[1]):
        yv = ys[0, j]
        if 0.2 <= abs(yv) <= 0.8:
            pos = rho[:, j] > thr
            if pos.any():
                slopes.append(float(xs[pos, j].min()) / abs(yv))
    a_run = float(np.median(slopes))
    print(f"  run edge slope={a_run:.4f} transport={float(traj.times[kq]):.3f}"
          f"  opening fit={2*math.degrees(math.atan(1/a_run)):.2f}"
          f" vs 2atan(1/t)={2*math.degrees(math.atan(1/float(traj.times[kq]))):.2f}")

    # sampled phi support opening at t=0.5 vs 2 atan(1/alpha)
    phi = cf_phi(pts, 0.5).reshape(g.shape)
    slopes = []
    for j in range(g.shape[1]):
        yv = ys[0, j]
        if 0.2 <= abs(yv) <= 0.8:
            pos = phi[:, j] > 0
            if pos.any():
                slopes.append(float(xs[pos, j].min()) / abs(yv))
    a_phi = float(np.median(slopes))
    print(f"  phi edge slope={a_phi:.4f} alpha={EPSF*0.5:.4f}"
          f"  opening={2*math.degrees(math.atan(1/a_phi)):.2f}"
          f" vs {2*math.degrees(math.atan(1/(EPSF*0.5))):.2f}")

# ---- cusp ----
TAU, DELTA, S2, EPSC = 0.3, 0.5, 1.0, 0.05
def cu_phi(pts, t):
    lam = math.exp(S2 * t)
    al = 1.0 + TAU * (TAU - t)
    val = pts[:, 0] ** 2 - (np.abs(pts[:, 1]) + EPSC) ** (2.0 * al)
    return np.where((pts[:, 0] >= 0) & (val > 0), lam * val, 0.0)

res = 128
g = box(((-0.25, 1.25), (-0.75, 0.75)), res)
pts = np.stack([c.ravel() for c in g.centers()], axis=-1)
bump = np.maximum(0.05 - (pts[:, 0] - 0.6) ** 2 - pts[:, 1] ** 2, 0.0)
u0 = 0.8 * np.minimum(cu_phi(pts, 0.0), bump)
t0 = time.time()
traj = run(Field(g, u0.reshape(g.shape) / 2.0, role="density"),
           DriftSpec("cusp", (DELTA, 1.0 / res)),
           SolverParams(m=M, t0=0.0, t1=0.05, snapshots=10))
print(f"cusp run: viol={violation(traj, cu_phi):.6g}  [{time.time()-t0:.1f}s]  10dx2={10/res**2:.3g}")

al_true = 1.0 + TAU * (TAU - 0.15)
phi = cu_phi(pts, 0.15).reshape(g.shape)
xs, ys = g.centers()
lx, ly = [], []
for j in range(g.shape[1]):
    yv = ys[0, j]
    if 0.05 <= abs(yv) <= 0.5:
        pos = phi[:, j] > 0
        if pos.any():
            lx.append(math.log(float(xs[pos, j].max())))
            ly.append(math.log(abs(yv) + EPSC))
slope = float(np.polyfit(ly, lx, 1)[0])
print(f"cusp exponent fit: {slope:.4f} true={al_true:.4f} rel={abs(slope/al_true-1):.4f}")
