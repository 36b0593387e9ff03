"""Compiled inner loop of the convex-decomposition search.

Everything here works in the affine (Bloch) picture: a qubit channel is the
pair (t, T), a generalized extreme channel is ``R_post (t_uv, T_uv) R_pre``,
and the Choi-state Frobenius distance between two channels equals
``0.5 * sqrt(|dt|^2 + ||dT||_F^2)``.

Parameter layout of one extreme channel (8 reals): ``[su, sv, a1, b1, c1, a2, b2, c2]``
with ``u = pi/2 sin(su)^2``, ``v = pi/2 sin(sv)^2`` and ZYZ Euler angles for the
pre- and post-rotation. A decomposition vector has 17 entries:
``[sp, ge1(8), ge2(8)]`` with mixing weight ``p = sin(sp)^2``.
"""
import math

import numpy as np
from numba import njit

_HALF_PI = 0.5 * math.pi
_GRID = 65
_GOLDEN = 0.5 * (math.sqrt(5.0) - 1.0)


@njit(cache=True)
def h2(p):
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


@njit(cache=True)
def canonical_ic(p, u, v):
    """Coherent information of the canonical (u, v) channel at input diag(p, 1-p)."""
    cu2 = math.cos(u) ** 2
    su2 = 1.0 - cu2
    cv2 = math.cos(v) ** 2
    return h2(p * cv2 + (1.0 - p) * su2) - h2(p * cv2 + (1.0 - p) * cu2)


@njit(cache=True)
def canonical_capacity(u, v):
    """max(0, max_p I_c(diag(p, 1-p))) for the canonical (u, v) channel.

    Grid scan followed by golden-section refinement around the best node.
    """
    best = 0.0
    ibest = -1
    for i in range(_GRID):
        val = canonical_ic(i / (_GRID - 1.0), u, v)
        if val > best:
            best = val
            ibest = i
    if ibest < 0:
        return 0.0
    a = max(ibest - 1, 0) / (_GRID - 1.0)
    b = min(ibest + 1, _GRID - 1) / (_GRID - 1.0)
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc = canonical_ic(c, u, v)
    fd = canonical_ic(d, u, v)
    for _ in range(48):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = canonical_ic(c, u, v)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = canonical_ic(d, u, v)
    return max(best, fc, fd)


@njit(cache=True)
def euler_rotation(a, b, c, out):
    """SO(3) matrix Rz(a) Ry(b) Rz(c), written into ``out``."""
    ca, sa = math.cos(a), math.sin(a)
    cb, sb = math.cos(b), math.sin(b)
    cc, sc = math.cos(c), math.sin(c)
    out[0, 0] = ca * cb * cc - sa * sc
    out[0, 1] = -ca * cb * sc - sa * cc
    out[0, 2] = ca * sb
    out[1, 0] = sa * cb * cc + ca * sc
    out[1, 1] = -sa * cb * sc + ca * cc
    out[1, 2] = sa * sb
    out[2, 0] = -sb * cc
    out[2, 1] = sb * sc
    out[2, 2] = cb


@njit(cache=True)
def ge_angles(x, off):
    u = _HALF_PI * math.sin(x[off]) ** 2
    v = _HALF_PI * math.sin(x[off + 1]) ** 2
    return u, v


@njit(cache=True)
def ge_affine(x, off, t, T, rpre, rpost):
    """Affine pair of the extreme channel stored at ``x[off:off+8]``."""
    u, v = ge_angles(x, off)
    euler_rotation(x[off + 2], x[off + 3], x[off + 4], rpre)
    euler_rotation(x[off + 5], x[off + 6], x[off + 7], rpost)
    d0 = math.cos(u - v)
    d1 = math.cos(u + v)
    d2 = d0 * d1
    tz = math.sin(u + v) * math.sin(u - v)
    for i in range(3):
        t[i] = rpost[i, 2] * tz
        for j in range(3):
            T[i, j] = rpost[i, 0] * d0 * rpre[0, j] + rpost[i, 1] * d1 * rpre[1, j] + rpost[i, 2] * d2 * rpre[2, j]


@njit(cache=True)
def mixing_weight(x):
    return math.sin(x[0]) ** 2


@njit(cache=True)
def residual(x, t0, T0):
    """Choi-state Frobenius distance between the mixture and the target."""
    t1 = np.empty(3)
    t2 = np.empty(3)
    T1 = np.empty((3, 3))
    T2 = np.empty((3, 3))
    ra = np.empty((3, 3))
    rb = np.empty((3, 3))
    ge_affine(x, 1, t1, T1, ra, rb)
    ge_affine(x, 9, t2, T2, ra, rb)
    p = mixing_weight(x)
    acc = 0.0
    for i in range(3):
        d = p * t1[i] + (1.0 - p) * t2[i] - t0[i]
        acc += d * d
        for j in range(3):
            d = p * T1[i, j] + (1.0 - p) * T2[i, j] - T0[i, j]
            acc += d * d
    return 0.5 * math.sqrt(acc)


@njit(cache=True)
def bound(x):
    p = mixing_weight(x)
    u1, v1 = ge_angles(x, 1)
    u2, v2 = ge_angles(x, 9)
    return p * canonical_capacity(u1, v1) + (1.0 - p) * canonical_capacity(u2, v2)


@njit(cache=True)
def penalized(x, t0, T0, mu):
    return bound(x) + mu * residual(x, t0, T0)


@njit(cache=True)
def _sort_simplex(sim, fs):
    order = np.argsort(fs, kind="mergesort")
    return sim[order].copy(), fs[order].copy()


@njit(cache=True)
def nelder_mead_penalized(x0, step, max_iters, tol, t0, T0, mu):
    """Adaptive Nelder-Mead on ``penalized``; same step rules as the simplex in optimize."""
    n = x0.size
    alpha = 1.0
    gamma = 1.0 + 2.0 / n
    rho = 0.75 - 1.0 / (2.0 * n)
    sigma = 1.0 - 1.0 / n
    sim = np.empty((n + 1, n))
    fs = np.empty(n + 1)
    for i in range(n + 1):
        sim[i] = x0
        if i > 0:
            sim[i, i - 1] += step
        fs[i] = penalized(sim[i], t0, T0, mu)
    it = 0
    converged = False
    while True:
        sim, fs = _sort_simplex(sim, fs)
        if fs[n] - fs[0] <= tol:
            converged = True
            break
        if it >= max_iters:
            break
        it += 1
        centroid = np.zeros(n)
        for i in range(n):
            centroid += sim[i]
        centroid /= n
        xr = centroid + alpha * (centroid - sim[n])
        fr = penalized(xr, t0, T0, mu)
        if fr < fs[0]:
            xe = centroid + gamma * (xr - centroid)
            fe = penalized(xe, t0, T0, mu)
            if fe < fr:
                sim[n] = xe
                fs[n] = fe
            else:
                sim[n] = xr
                fs[n] = fr
            continue
        if fr < fs[n - 1]:
            sim[n] = xr
            fs[n] = fr
            continue
        if fr < fs[n]:
            xc = centroid + rho * (xr - centroid)
            fc = penalized(xc, t0, T0, mu)
            if fc <= fr:
                sim[n] = xc
                fs[n] = fc
                continue
        else:
            xc = centroid + rho * (sim[n] - centroid)
            fc = penalized(xc, t0, T0, mu)
            if fc < fs[n]:
                sim[n] = xc
                fs[n] = fc
                continue
        for i in range(1, n + 1):
            sim[i] = sim[0] + sigma * (sim[i] - sim[0])
            fs[i] = penalized(sim[i], t0, T0, mu)
    return sim[0].copy(), fs[0], it, converged
