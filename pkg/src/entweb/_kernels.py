"""Compiled inner loops for the brute-force lattice scans.

gamma and beta are evaluated from the matrix ``P = M M~`` of the triplet
block: its trace, second invariant and determinant give the cubic whose
roots are ``lambda_i^2``. No closed-form region function enters, so the
scan is independent of the analytic case machinery it checks.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


@njit(cache=True)
def gamma_beta(ax, ay, az, X, Y, Z):
    """``(gamma, beta)`` at one point."""
    m = np.empty((3, 3), np.complex128)
    mt = np.empty((3, 3), np.complex128)
    p = np.empty((3, 3), np.complex128)
    return _gamma_beta(ax, ay, az, X, Y, Z, m, mt, p)


@njit(cache=True)
def _gamma_beta(ax, ay, az, X, Y, Z, m, mt, p):
    x = math.sqrt(X)
    y = math.sqrt(Y)
    z = math.sqrt(Z)
    m[0, 0] = ax
    m[1, 1] = ay
    m[2, 2] = az
    m[0, 1] = z
    m[1, 0] = z
    m[1, 2] = x
    m[2, 1] = x
    m[0, 2] = -1j * y
    m[2, 0] = 1j * y
    for a in range(3):
        for b in range(3):
            mt[a, b] = m[a, b]
    mt[0, 1] = -z
    mt[1, 0] = -z
    mt[1, 2] = -x
    mt[2, 1] = -x
    mt[0, 2] = 1j * y
    mt[2, 0] = -1j * y
    for a in range(3):
        for b in range(3):
            s = 0j
            for c in range(3):
                s += m[a, c] * mt[c, b]
            p[a, b] = s
    e1 = (p[0, 0] + p[1, 1] + p[2, 2]).real
    tr2 = 0.0
    for a in range(3):
        for b in range(3):
            tr2 += (p[a, b] * p[b, a]).real
    e2 = 0.5 * (e1 * e1 - tr2)
    e3 = (
        p[0, 0] * (p[1, 1] * p[2, 2] - p[1, 2] * p[2, 1])
        - p[0, 1] * (p[1, 0] * p[2, 2] - p[1, 2] * p[2, 0])
        + p[0, 2] * (p[1, 0] * p[2, 1] - p[1, 1] * p[2, 0])
    ).real
    c2 = -e1
    q1 = e2 - c2 * c2 / 3.0
    q0 = 2.0 * c2**3 / 27.0 - c2 * e2 / 3.0 - e3
    r = math.sqrt(max(-q1 / 3.0, 0.0))
    arg = 0.0
    if r > 0.0:
        arg = min(1.0, max(-1.0, -q0 / (2.0 * r**3)))
    th = math.acos(arg) / 3.0
    l0 = math.sqrt(max(2.0 * r * math.cos(th) - c2 / 3.0, 0.0))
    l1 = math.sqrt(max(2.0 * r * math.cos(th - 2.0 * math.pi / 3.0) - c2 / 3.0, 0.0))
    l2 = math.sqrt(max(2.0 * r * math.cos(th - 4.0 * math.pi / 3.0) - c2 / 3.0, 0.0))
    hi = max(l0, max(l1, l2))
    beta = l0 + l1 + l2
    return 2.0 * hi - beta, beta


@njit(cache=True)
def _feasible(a, s2, X, Y, Z):
    if a[0] * a[1] * a[2] - a[0] * X - a[1] * Y - a[2] * Z < -1e-13:
        return False
    fs = 1.0
    v = (X, Y, Z)
    for k in range(3):
        if s2[k] > 0.0:
            fs -= v[k] / s2[k]
        elif v[k] > 0.0:
            return False
    return fs >= -1e-13


@njit(cache=True)
def _better(val, X, Y, Z, best, bx, by, bz, sign):
    # sign = +1 maximizes, -1 minimizes; ties go to the lexicographically smaller point
    d = sign * (val - best)
    if d > 0.0:
        return True
    if d < 0.0:
        return False
    if X != bx:
        return X < bx
    if Y != by:
        return Y < by
    return Z < bz


@njit(cache=True)
def _boundary_coord(a, s2, ext, k, u, v):
    # largest value of coordinate k with the other two fixed at (u, v), or -1 if none
    i = (k + 1) % 3
    j = (k + 2) % 3
    lim = 1e300
    if a[k] > 0.0:
        lim = (a[0] * a[1] * a[2] - a[i] * u - a[j] * v) / a[k]
    fs = 1.0
    if s2[i] > 0.0:
        fs -= u / s2[i]
    elif u > 0.0:
        return -1.0
    if s2[j] > 0.0:
        fs -= v / s2[j]
    elif v > 0.0:
        return -1.0
    lim = min(lim, s2[k] * fs, ext[k])
    if lim < 0.0:
        return -1.0
    return lim


@njit(cache=True)
def lattice_extreme(a, s2, ext, r, sign):
    """Extreme of gamma (sign=+1, maximum) or beta (sign=-1, minimum) over V.

    Scans the ``(r+1)^3`` lattice on the bounding box ``ext`` and, for each
    lattice line parallel to an axis, the point where it leaves V.
    """
    best = -sign * 1e300
    bx = by = bz = 0.0
    m = np.empty((3, 3), np.complex128)
    mt = np.empty((3, 3), np.complex128)
    p = np.empty((3, 3), np.complex128)
    pt = np.empty(3)
    npts = np.empty(3, np.int64)
    for k in range(3):
        npts[k] = r + 1 if ext[k] > 0.0 else 1
    for i in range(npts[0]):
        X = ext[0] * i / r
        for j in range(npts[1]):
            Y = ext[1] * j / r
            for k in range(npts[2]):
                Z = ext[2] * k / r
                if not _feasible(a, s2, X, Y, Z):
                    break
                g, b = _gamma_beta(a[0], a[1], a[2], X, Y, Z, m, mt, p)
                val = g if sign > 0 else b
                if _better(val, X, Y, Z, best, bx, by, bz, sign):
                    best = val
                    bx, by, bz = X, Y, Z
    for k in range(3):
        i = (k + 1) % 3
        j = (k + 2) % 3
        for ii in range(npts[i]):
            u = ext[i] * ii / r
            for jj in range(npts[j]):
                v = ext[j] * jj / r
                w = _boundary_coord(a, s2, ext, k, u, v)
                if w < 0.0:
                    continue
                pt[i] = u
                pt[j] = v
                pt[k] = w
                g, b = _gamma_beta(a[0], a[1], a[2], pt[0], pt[1], pt[2], m, mt, p)
                val = g if sign > 0 else b
                if _better(val, pt[0], pt[1], pt[2], best, bx, by, bz, sign):
                    best = val
                    bx, by, bz = pt[0], pt[1], pt[2]
    return best, bx, by, bz


@njit(cache=True)
def _inside(a, s2, ext, X, Y, Z):
    # strict membership in V intersected with its bounding box
    if X < 0.0 or Y < 0.0 or Z < 0.0 or X > ext[0] or Y > ext[1] or Z > ext[2]:
        return False
    if a[0] * a[1] * a[2] - a[0] * X - a[1] * Y - a[2] * Z < 0.0:
        return False
    fs = 1.0
    v = (X, Y, Z)
    for k in range(3):
        if s2[k] > 0.0:
            fs -= v[k] / s2[k]
        elif v[k] > 0.0:
            return False
    return fs >= 0.0


@njit(cache=True)
def compass_search(a, s2, ext, start, dirs, sign, step0, min_step, max_sweeps=4000):
    """Compass search of gamma (sign=+1, up) or beta (sign=-1, down) inside V.

    Every improving direction of a sweep is taken; the step halves after a
    sweep without progress. ``max_sweeps`` bounds the work on curved ridges.
    """
    m = np.empty((3, 3), np.complex128)
    mt = np.empty((3, 3), np.complex128)
    p = np.empty((3, 3), np.complex128)
    cur = start.copy()
    g, b = _gamma_beta(a[0], a[1], a[2], cur[0], cur[1], cur[2], m, mt, p)
    val = g if sign > 0 else b
    step = step0
    sweeps = 0
    while step > min_step and sweeps < max_sweeps:
        sweeps += 1
        moved = False
        for d in range(dirs.shape[0]):
            X = cur[0] + step * dirs[d, 0]
            Y = cur[1] + step * dirs[d, 1]
            Z = cur[2] + step * dirs[d, 2]
            if not _inside(a, s2, ext, X, Y, Z):
                continue
            g, b = _gamma_beta(a[0], a[1], a[2], X, Y, Z, m, mt, p)
            v = g if sign > 0 else b
            # gains at rounding level would let the search creep forever
            if sign * (v - val) > 1e-15 * max(1.0, abs(val)):
                cur[0], cur[1], cur[2] = X, Y, Z
                val = v
                moved = True
        if not moved:
            step /= 2.0
    return val, cur
