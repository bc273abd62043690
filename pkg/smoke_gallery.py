"""Measure discrete residual floors for every gallery candidate."""
import math
import time

import numpy as np
from scipy import ndimage

from pmefront.drift import DriftSpec
from pmefront.grids import Field, GridSpec, discrete_gradient, discrete_laplacian, interior_mask


def residual_min(phi_fn, region_fn, drift, m, times, grid, collar=3):
    """L phi = phi_t - (m-1) phi lap phi - |grad phi|^2 - grad phi . b - (m-1) phi div b."""
    pts = np.stack([c.ravel() for c in grid.centers()], axis=-1)
    h_t = 1e-4
    worst = math.inf
    wt = None
    for t in times:
        phi = phi_fn(pts, t).reshape(grid.shape)
        phi_t = (phi_fn(pts, t + h_t) - phi_fn(pts, t - h_t)).reshape(grid.shape) / (2 * h_t)
        f = Field(grid, phi)
        lap = discrete_laplacian(f).values
        grad = discrete_gradient(f)
        b = drift(pts, t)
        div = drift.divergence(pts, t).reshape(grid.shape)
        adv = np.zeros(grid.shape)
        g2 = np.zeros(grid.shape)
        for ax in range(2):
            adv += grad.components[ax] * b[:, ax].reshape(grid.shape)
            g2 += grad.components[ax] ** 2
        resid = phi_t - (m - 1) * phi * lap - g2 - adv - (m - 1) * phi * div
        mask = region_fn(pts, t).reshape(grid.shape)
        mask = ndimage.binary_erosion(mask, iterations=2) & interior_mask(grid, collar)
        if not mask.any():
            raise ValueError("empty region")
        v = float(resid[mask].min())
        if v < worst:
            worst, wt = v, t
    return worst, wt


def box(bounds, res):
    cells = tuple(int(round((hi - lo) * res)) for lo, hi in bounds)
    return GridSpec(bounds, cells)


M = 2.0

# 1. stationary corner: exact solution, any m
def sc_phi(pts, t):
    gx = np.where((pts[:, 0] > 0) & (pts[:, 0] < 1), np.sin(np.pi * pts[:, 0]), 0.0)
    gy = np.where((pts[:, 1] > 0) & (pts[:, 1] < 1), np.sin(np.pi * pts[:, 1]), 0.0)
    return np.maximum(gx * gy, 0.0)

def sc_region(pts, t):
    return (pts[:, 0] > 0) & (pts[:, 0] < 1) & (pts[:, 1] > 0) & (pts[:, 1] < 1)

for res in (64, 128, 256):
    g = box(((-0.3125, 1.3125), (-0.3125, 1.3125)), res)
    t0 = time.time()
    w, wt = residual_min(sc_phi, sc_region, DriftSpec("corner-gradient"), M, [0.0, 0.1], g)
    print(f"stationary res={res}: min={w:.6g} (t={wt}) dx2={1/res**2:.3g}  [{time.time()-t0:.2f}s]")

# 2. shrinking corner: a=0, b=17, k0=1, sigma1=30
A, B, K0, S1 = 0.0, 17.0, 1.0, 30.0
def sh_phi(pts, t):
    lam = math.exp(S1 * t)
    k = K0 * math.exp(t)
    val = pts[:, 0] ** 2 - k * pts[:, 1] ** 2
    return np.where((pts[:, 0] > 0) & (val > 0), lam * val, 0.0)

def sh_region(pts, t):
    k = K0 * math.exp(t)
    return pts[:, 0] > math.sqrt(k) * np.abs(pts[:, 1])

sh_drift = DriftSpec("linear-diagonal", (A, B))
for res in (64, 128, 256):
    g = box(((-0.25, 1.25), (-0.75, 0.75)), res)
    w, wt = residual_min(sh_phi, sh_region, sh_drift, M, [1e-3, 0.01, 1.0 / 30.0], g)
    print(f"shrinking res={res}: min={w:.6g} (t={wt}) dx={1/res:.4g}")

# negative control: sigma1 = 1
def sh_phi_bad(pts, t):
    lam = math.exp(1.0 * t)
    k = K0 * math.exp(t)
    val = pts[:, 0] ** 2 - k * pts[:, 1] ** 2
    return np.where((pts[:, 0] > 0) & (val > 0), lam * val, 0.0)

g = box(((-0.25, 1.25), (-0.75, 0.75)), 128)
w, wt = residual_min(sh_phi_bad, sh_region, sh_drift, M, [1e-3, 0.01, 0.5, 1.0], g)
print(f"shrinking NEGATIVE sigma1=1: min={w:.6g} (t={wt})")

# 3. corner formation: sigma1=4m, sigma0=e^-8/2, eps=1/4
S0, EPSF = math.exp(-8.0) / 2.0, 0.25
def cf_phi(pts, t):
    lam = S0 * math.exp(4.0 * M * t)
    al = EPSF * t
    val = pts[:, 0] - al * np.abs(pts[:, 1])
    return np.where(val > 0, lam * pts[:, 0] * val, 0.0) * (pts[:, 0] > 0)

def cf_region(pts, t):
    al = EPSF * t
    return (pts[:, 0] > 0) & (pts[:, 0] > al * np.abs(pts[:, 1]))

cf_drift = DriftSpec("corner-formation")
for res in (64, 128, 256):
    g = box(((-0.5, 1.5), (-1.25, 1.25)), res)
    w, wt = residual_min(cf_phi, cf_region, cf_drift, M, [0.0, 0.5, 1.0], g)
    print(f"formation res={res}: min={w:.6g} (t={wt}) dx={1/res:.4g}")

# 4. cusp: tau=0.3, delta=0.5, sigma2=1, eps=0.05
TAU, DELTA, S2, EPSC = 0.3, 0.5, 1.0, 0.05
def cu_phi(pts, t):
    lam = math.exp(S2 * t)
    al = 1.0 + TAU * (TAU - t)
    val = pts[:, 0] ** 2 - (np.abs(pts[:, 1]) + EPSC) ** (2.0 * al)
    return np.where((pts[:, 0] >= 0) & (val > 0), lam * val, 0.0)

def cu_region(pts, t):
    al = 1.0 + TAU * (TAU - t)
    return (pts[:, 0] >= 0) & (pts[:, 0] ** 2 > (np.abs(pts[:, 1]) + EPSC) ** (2.0 * al))

for res in (64, 128, 256):
    g = box(((-0.25, 1.25), (-0.75, 0.75)), res)
    cu_drift = DriftSpec("cusp", (DELTA, 1.0 / res))
    w, wt = residual_min(cu_phi, cu_region, cu_drift, M, [0.0, 0.15, 0.3], g)
    print(f"cusp res={res}: min={w:.6g} (t={wt}) dx={1/res:.4g}")

# 5. traveling-wave barrier: sigma1 = sup|alpha|+1 = 2
def tw_phi(pts, t):
    return np.maximum(pts[:, 0] + 2.0 * t, 0.0)

def tw_region(pts, t):
    return pts[:, 0] + 2.0 * t > 0

tw_drift = DriftSpec("laminar-sine", (1.0, 8.0))
for res in (128, 256):
    nx, ny = 208 * res // 128, 100 * res // 128
    g = GridSpec(((-0.725, 0.9), (np.pi / 16, 5 * np.pi / 16)), (nx, ny))
    w, wt = residual_min(tw_phi, tw_region, tw_drift, M, [0.0, 0.1, 0.25], g)
    print(f"tw res={res}: min={w:.6g} (t={wt})")
