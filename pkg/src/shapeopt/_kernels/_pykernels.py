"""Pure-Python reference implementations of the hot kernels.

Semantics must match ``_ckernels.pyx`` exactly; the test-suite runs both
backends against each other.
"""
import math

import numpy as np


def pava_nonincreasing(y, w):
    """Weighted least-squares nonincreasing fit by pool-adjacent-violators."""
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    n = y.shape[0]
    vals = []
    wts = []
    counts = []
    for i in range(n):
        v = float(y[i])
        wt = float(w[i])
        c = 1
        # a block must not be smaller than its right neighbour
        while vals and vals[-1] < v:
            pv = vals.pop()
            pw = wts.pop()
            pc = counts.pop()
            v = (pv * pw + v * wt) / (pw + wt)
            wt = pw + wt
            c += pc
        vals.append(v)
        wts.append(wt)
        counts.append(c)
    out = np.empty(n)
    pos = 0
    for v, c in zip(vals, counts):
        out[pos:pos + c] = v
        pos += c
    return out


def project_concave_profile(u, M, dr, max_sweeps=50, tol=1e-12):
    """Map heights onto {0 <= u <= M, nonincreasing, concave}.

    Alternates a monotone pass (PAVA on heights) with a concavity pass (PAVA
    on the cell slopes, slopes capped at zero, heights re-integrated with a
    least-squares offset and shifted/capped into [0, M]) until the sweep
    changes nothing beyond ``tol``. Returns ``(heights, sweeps)``.
    """
    u = np.clip(np.asarray(u, dtype=np.float64), 0.0, M)
    n = u.shape[0]
    ones_h = np.ones(n)
    ones_s = np.ones(n - 1)
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        prev = u
        u = np.clip(pava_nonincreasing(u, ones_h), 0.0, M)
        s = np.diff(u) / dr
        s = np.minimum(pava_nonincreasing(s, ones_s), 0.0)
        base = np.empty(n)
        acc = 0.0
        base[0] = 0.0
        for i in range(n - 1):
            acc += s[i] * dr
            base[i + 1] = acc
        shift = 0.0
        for i in range(n):
            shift += u[i] - base[i]
        u = base + shift / n
        if u[n - 1] < 0.0:
            u = u - u[n - 1]
        u = np.minimum(u, M)
        if np.max(np.abs(u - prev)) <= tol:
            break
    return u, sweeps


def profile_resistance(u, dr):
    """Midpoint rule for 2*pi * int r / (1 + u'(r)^2) dr over cells."""
    u = np.asarray(u, dtype=np.float64)
    total = 0.0
    for i in range(u.shape[0] - 1):
        s = (u[i + 1] - u[i]) / dr
        total += (i + 0.5) * dr * dr / (1.0 + s * s)
    return 2.0 * math.pi * total


def convex_polygon_distance(points, vertices):
    """Euclidean distance from each point to a CCW convex polygon (0 inside)."""
    p = np.asarray(points, dtype=np.float64)
    v = np.asarray(vertices, dtype=np.float64)
    a = v
    e = np.roll(v, -1, axis=0) - v
    ee = np.einsum("ij,ij->i", e, e)
    # outward test via edge cross products; inside iff no edge sees the point
    rel = p[:, None, :] - a[None, :, :]
    cross = e[None, :, 0] * rel[:, :, 1] - e[None, :, 1] * rel[:, :, 0]
    outside = (cross < 0.0).any(axis=1)
    t = np.clip(np.einsum("pkd,kd->pk", rel, e) / ee[None, :], 0.0, 1.0)
    d = rel - t[:, :, None] * e[None, :, :]
    dist = np.sqrt(np.min(np.einsum("pkd,pkd->pk", d, d), axis=1))
    return np.where(outside, dist, 0.0)
