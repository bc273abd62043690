"""Serial ball-minimum kernels behind the inf-convolution.

Each cell takes the minimum of a field over the ball of its own radius:
every cell center inside the ball plus one layer of linearly interpolated
samples on the rim circle (rim endpoints in 1-D).  The reported argmin is
the first minimizing *cell* in row-major order — rim samples refine the
value but never the minimizer, which downstream identity checks treat as
accurate to one cell anyway.

``tie`` marks cells whose ball contains a second minimizing cell away from
the argmin (at machine precision, beyond 1.5 cells): there the minimizer is
genuinely ambiguous and gradient identities do not apply.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _lerp1(vals, lo, dx, px):
    n = vals.shape[0]
    g = (px - lo) / dx - 0.5
    i0 = int(math.floor(g))
    if i0 < 0:
        i0, t = 0, 0.0
    elif i0 > n - 2:
        i0, t = n - 2, 1.0
    else:
        t = g - i0
    return (1.0 - t) * vals[i0] + t * vals[i0 + 1]


@njit(cache=True, inline="always")
def _lerp2(vals, lo0, lo1, dx, dy, px, py):
    n0, n1 = vals.shape
    gx = (px - lo0) / dx - 0.5
    gy = (py - lo1) / dy - 0.5
    i0 = int(math.floor(gx))
    if i0 < 0:
        i0, tx = 0, 0.0
    elif i0 > n0 - 2:
        i0, tx = n0 - 2, 1.0
    else:
        tx = gx - i0
    j0 = int(math.floor(gy))
    if j0 < 0:
        j0, ty = 0, 0.0
    elif j0 > n1 - 2:
        j0, ty = n1 - 2, 1.0
    else:
        ty = gy - j0
    return (
        (1.0 - tx) * (1.0 - ty) * vals[i0, j0]
        + tx * (1.0 - ty) * vals[i0 + 1, j0]
        + (1.0 - tx) * ty * vals[i0, j0 + 1]
        + tx * ty * vals[i0 + 1, j0 + 1]
    )


@njit(cache=True)
def ball_min_1d(vals, radii, lo, dx):
    n = vals.shape[0]
    hi = lo + n * dx
    f = np.empty(n)
    arg = np.empty(n, np.int64)
    flag = np.zeros(n, np.bool_)
    tie = np.zeros(n, np.bool_)
    for i in range(n):
        c = lo + (i + 0.5) * dx
        r = radii[i]
        if c - r < lo or c + r > hi:
            flag[i] = True
        reach = int(r / dx) + 1
        ilo = i - reach if i - reach > 0 else 0
        ihi = i + reach if i + reach < n - 1 else n - 1
        best = np.inf
        bi = i
        r2 = r * r * (1.0 + 1e-14)
        for i2 in range(ilo, ihi + 1):
            d = (i2 - i) * dx
            if d * d <= r2 and vals[i2] < best:
                best = vals[i2]
                bi = i2
        tol = 1e-12 * (1.0 + abs(best))
        for i2 in range(ilo, ihi + 1):
            d = (i2 - i) * dx
            if d * d <= r2 and vals[i2] <= best + tol and abs(i2 - bi) > 1:
                tie[i] = True
                break
        for s in (-1.0, 1.0):
            v = _lerp1(vals, lo, dx, c + s * r)
            if v < best:
                best = v
        f[i] = best
        arg[i] = bi
    return f, arg, flag, tie


@njit(cache=True)
def ball_min_2d(vals, radii, lo0, lo1, dx, dy):
    n0, n1 = vals.shape
    hi0 = lo0 + n0 * dx
    hi1 = lo1 + n1 * dy
    f = np.empty((n0, n1))
    arg_i = np.empty((n0, n1), np.int64)
    arg_j = np.empty((n0, n1), np.int64)
    flag = np.zeros((n0, n1), np.bool_)
    tie = np.zeros((n0, n1), np.bool_)
    h_min = dx if dx < dy else dy
    tie_r2 = 2.25 * h_min * h_min
    for i in range(n0):
        cx = lo0 + (i + 0.5) * dx
        for j in range(n1):
            cy = lo1 + (j + 0.5) * dy
            r = radii[i, j]
            if cx - r < lo0 or cx + r > hi0 or cy - r < lo1 or cy + r > hi1:
                flag[i, j] = True
            ri = int(r / dx) + 1
            rj = int(r / dy) + 1
            ilo = i - ri if i - ri > 0 else 0
            ihi = i + ri if i + ri < n0 - 1 else n0 - 1
            jlo = j - rj if j - rj > 0 else 0
            jhi = j + rj if j + rj < n1 - 1 else n1 - 1
            best = np.inf
            bi, bj = i, j
            r2 = r * r * (1.0 + 1e-14)
            for i2 in range(ilo, ihi + 1):
                ddx = (i2 - i) * dx
                for j2 in range(jlo, jhi + 1):
                    ddy = (j2 - j) * dy
                    if ddx * ddx + ddy * ddy <= r2 and vals[i2, j2] < best:
                        best = vals[i2, j2]
                        bi, bj = i2, j2
            tol = 1e-12 * (1.0 + abs(best))
            done = False
            for i2 in range(ilo, ihi + 1):
                ddx = (i2 - i) * dx
                dbx = (i2 - bi) * dx
                for j2 in range(jlo, jhi + 1):
                    ddy = (j2 - j) * dy
                    dby = (j2 - bj) * dy
                    if (
                        ddx * ddx + ddy * ddy <= r2
                        and vals[i2, j2] <= best + tol
                        and dbx * dbx + dby * dby > tie_r2
                    ):
                        tie[i, j] = True
                        done = True
                        break
                if done:
                    break
            ntheta = int(6.283185307179586 * r / h_min) + 8
            for k in range(ntheta):
                ang = 6.283185307179586 * k / ntheta
                v = _lerp2(
                    vals, lo0, lo1, dx, dy,
                    cx + r * math.cos(ang), cy + r * math.sin(ang),
                )
                if v < best:
                    best = v
            f[i, j] = best
            arg_i[i, j] = bi
            arg_j[i, j] = bj
    return f, arg_i, arg_j, flag, tie
