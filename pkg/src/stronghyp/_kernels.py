"""Compiled quadruple scans.

All scans enumerate quadruples in lexicographic order and break ties in
favour of the first quadruple reached, so results do not depend on how the
outer index is chunked.
"""

import math

import numba
import numpy as np

_jit = numba.njit(cache=True, nogil=True)


@_jit
def triangle_violation(D):
    n = D.shape[0]
    worst = -np.inf
    wi = wj = wk = 0
    for i in range(n):
        for j in range(n):
            dij = D[i, j]
            for k in range(n):
                v = D[i, k] - (dij + D[j, k])
                if v > worst:
                    worst = v
                    wi, wj, wk = i, j, k
    return worst, (wi, wj, wk)


@_jit
def _sorted3(s1, s2, s3):
    a = max(s1, s2)
    b = min(s1, s2)
    top = max(a, s3)
    mid = max(b, min(a, s3))
    low = min(b, s3)
    return top, mid, low


@_jit
def pair_sums(D, x, y, z, t):
    return D[x, y] + D[z, t], D[x, z] + D[y, t], D[x, t] + D[y, z]


@_jit
def quad_gaps(D, x, y, z, t):
    """Half-gaps (top - mid)/2 and (top - low)/2 of the three pair sums."""
    s1, s2, s3 = pair_sums(D, x, y, z, t)
    top, mid, low = _sorted3(s1, s2, s3)
    return 0.5 * (top - mid), 0.5 * (top - low)


@_jit
def delta_scan(D, i_lo, i_hi):
    n = D.shape[0]
    best = -1.0
    w = (0, 0, 0, 0)
    for i in range(i_lo, i_hi):
        Di = D[i]
        for j in range(i, n):
            Dj = D[j]
            dij = Di[j]
            for k in range(j, n):
                Dk = D[k]
                dik = Di[k]
                djk = Dj[k]
                for l in range(k, n):
                    s1 = dij + Dk[l]
                    s2 = dik + Dj[l]
                    s3 = Di[l] + djk
                    a = max(s1, s2)
                    b = min(s1, s2)
                    top = max(a, s3)
                    mid = max(b, min(a, s3))
                    p = 0.5 * (top - mid)
                    if p > best:
                        best = p
                        w = (i, j, k, l)
    return best, w


@_jit
def basepoint_delta_scan(D, o):
    """max over x <= y <= z of the four-point gap of (x, y, z, o)."""
    n = D.shape[0]
    best = -1.0
    w = (0, 0, 0, o)
    Do = D[o]
    for x in range(n):
        Dx = D[x]
        for y in range(x, n):
            Dy = D[y]
            dxy = Dx[y]
            dyo = Do[y]
            dxo = Do[x]
            for z in range(y, n):
                s1 = dxy + Do[z]
                s2 = Dx[z] + dyo
                s3 = dxo + Dy[z]
                a = max(s1, s2)
                b = min(s1, s2)
                top = max(a, s3)
                mid = max(b, min(a, s3))
                p = 0.5 * (top - mid)
                if p > best:
                    best = p
                    w = (x, y, z, o)
    return best, w


@_jit
def crossing(p, q, tol, cap):
    """Largest eps (to within tol) with exp(-eps p) + exp(-eps q) >= 1; inf if beyond cap."""
    if p <= 0.0:
        return np.inf
    hi = 1.0
    while math.exp(-hi * p) + math.exp(-hi * q) >= 1.0:
        hi *= 2.0
        if hi > cap:
            return np.inf
    lo = 0.0 if hi == 1.0 else 0.5 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if math.exp(-mid * p) + math.exp(-mid * q) >= 1.0:
            lo = mid
        else:
            hi = mid
    return lo


@_jit
def eps_scan(D, i_lo, i_hi, gap_tol, tol, cap):
    n = D.shape[0]
    best = np.inf
    w = (-1, -1, -1, -1)
    for i in range(i_lo, i_hi):
        Di = D[i]
        for j in range(i, n):
            Dj = D[j]
            dij = Di[j]
            for k in range(j, n):
                Dk = D[k]
                dik = Di[k]
                djk = Dj[k]
                for l in range(k, n):
                    s1 = dij + Dk[l]
                    s2 = dik + Dj[l]
                    s3 = Di[l] + djk
                    a = max(s1, s2)
                    b = min(s1, s2)
                    top = max(a, s3)
                    mid = max(b, min(a, s3))
                    p = 0.5 * (top - mid)
                    if p <= gap_tol:
                        continue
                    low = min(b, s3)
                    q = 0.5 * (top - low)
                    if best < np.inf and math.exp(-best * p) + math.exp(-best * q) >= 1.0:
                        continue
                    e = crossing(p, q, tol, cap)
                    if e < best:
                        best = e
                        w = (i, j, k, l)
    return best, w


@_jit
def strong_margin_scan(D, eps):
    """min over (x, y, z, o) of (e^{-eps(x,z)_o} + e^{-eps(z,y)_o}) / e^{-eps(x,y)_o} - 1."""
    n = D.shape[0]
    best = np.inf
    w = (0, 0, 0, 0)
    E = np.empty((n, n))
    for o in range(n):
        for a in range(n):
            for b in range(n):
                E[a, b] = math.exp(-eps * 0.5 * (D[a, o] + D[b, o] - D[a, b]))
        for x in range(n):
            for y in range(n):
                exy = E[x, y]
                for z in range(n):
                    m = (E[x, z] + E[z, y]) / exy - 1.0
                    if m < best:
                        best = m
                        w = (x, y, z, o)
    return best, w


@_jit
def ptolemy_margin_scan(V):
    """min over ordered quadruples of (V12 V34 + V14 V23) / (V13 V24) - 1."""
    n = V.shape[0]
    best = np.inf
    w = (0, 0, 0, 0)
    for a in range(n):
        for b in range(n):
            for c in range(n):
                vac = V[a, c]
                vab = V[a, b]
                vbc = V[b, c]
                for d in range(n):
                    m = (vab * V[c, d] + V[a, d] * vbc) / (vac * V[b, d]) - 1.0
                    if m < best:
                        best = m
                        w = (a, b, c, d)
    return best, w


@_jit
def product_delta_scan(D):
    """max over (x, y, z, o) of min{(x,z)_o, (y,z)_o} - (x,y)_o."""
    n = D.shape[0]
    best = -np.inf
    w = (0, 0, 0, 0)
    G = np.empty((n, n))
    for o in range(n):
        for a in range(n):
            for b in range(n):
                G[a, b] = 0.5 * (D[a, o] + D[b, o] - D[a, b])
        for x in range(n):
            for y in range(n):
                gxy = G[x, y]
                for z in range(n):
                    v = min(G[x, z], G[y, z]) - gxy
                    if v > best:
                        best = v
                        w = (x, y, z, o)
    return best, w
