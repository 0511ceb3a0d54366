# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Mirrors ``_pykernels`` operation for operation."""
import numpy as np

from libc.math cimport sqrt

cdef double PI = 3.141592653589793


cdef Py_ssize_t _pava_into(const double[:] y, const double[:] w, double[:] out,
                           double[:] vals, double[:] wts, Py_ssize_t[:] counts) noexcept nogil:
    cdef Py_ssize_t n = y.shape[0]
    cdef Py_ssize_t top = 0
    cdef Py_ssize_t i, j, c, pos
    cdef double v, wt
    for i in range(n):
        v = y[i]
        wt = w[i]
        c = 1
        while top > 0 and vals[top - 1] < v:
            top -= 1
            v = (vals[top] * wts[top] + v * wt) / (wts[top] + wt)
            wt = wts[top] + wt
            c += counts[top]
        vals[top] = v
        wts[top] = wt
        counts[top] = c
        top += 1
    pos = 0
    for i in range(top):
        for j in range(counts[i]):
            out[pos] = vals[i]
            pos += 1
    return top


def pava_nonincreasing(y, w):
    cdef const double[:] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef const double[:] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t n = yv.shape[0]
    out = np.empty(n)
    cdef double[:] ov = out
    cdef double[:] vals = np.empty(n)
    cdef double[:] wts = np.empty(n)
    cdef Py_ssize_t[:] counts = np.empty(n, dtype=np.intp)
    with nogil:
        _pava_into(yv, wv, ov, vals, wts, counts)
    return out


def project_concave_profile(u, double M, double dr, int max_sweeps=50, double tol=1e-12):
    cdef double[:] cur = np.clip(np.asarray(u, dtype=np.float64), 0.0, M).copy()
    cdef Py_ssize_t n = cur.shape[0]
    cdef double[:] prev = np.empty(n)
    cdef double[:] mono = np.empty(n)
    cdef double[:] slopes = np.empty(n - 1)
    cdef double[:] fitted = np.empty(n - 1)
    cdef double[:] ones = np.ones(n)
    cdef double[:] ones_s = np.ones(n - 1)
    cdef double[:] vals = np.empty(n)
    cdef double[:] wts = np.empty(n)
    cdef Py_ssize_t[:] counts = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t i
    cdef int sweeps = 0
    cdef int k
    cdef double acc, shift, low, change, d
    with nogil:
        for k in range(1, max_sweeps + 1):
            sweeps = k
            for i in range(n):
                prev[i] = cur[i]
            _pava_into(cur, ones, mono, vals, wts, counts)
            for i in range(n):
                if mono[i] < 0.0:
                    mono[i] = 0.0
                elif mono[i] > M:
                    mono[i] = M
            for i in range(n - 1):
                slopes[i] = (mono[i + 1] - mono[i]) / dr
            _pava_into(slopes, ones_s, fitted, vals, wts, counts)
            # re-integrate; cur holds the running base heights
            acc = 0.0
            cur[0] = 0.0
            for i in range(n - 1):
                if fitted[i] > 0.0:
                    fitted[i] = 0.0
                acc = acc + fitted[i] * dr
                cur[i + 1] = acc
            shift = 0.0
            for i in range(n):
                shift = shift + (mono[i] - cur[i])
            shift = shift / n
            for i in range(n):
                cur[i] = cur[i] + shift
            low = cur[n - 1]
            if low < 0.0:
                for i in range(n):
                    cur[i] = cur[i] - low
            change = 0.0
            for i in range(n):
                if cur[i] > M:
                    cur[i] = M
                d = cur[i] - prev[i]
                if d < 0.0:
                    d = -d
                if d > change:
                    change = d
            if change <= tol:
                break
    return np.asarray(cur), sweeps


def profile_resistance(u, double dr):
    cdef const double[:] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t i
    cdef double s, total = 0.0
    with nogil:
        for i in range(uv.shape[0] - 1):
            s = (uv[i + 1] - uv[i]) / dr
            total += (i + 0.5) * dr * dr / (1.0 + s * s)
    return 2.0 * PI * total


def convex_polygon_distance(points, vertices):
    cdef const double[:, :] p = np.ascontiguousarray(points, dtype=np.float64)
    cdef const double[:, :] v = np.ascontiguousarray(vertices, dtype=np.float64)
    cdef Py_ssize_t npts = p.shape[0]
    cdef Py_ssize_t nv = v.shape[0]
    out = np.empty(npts)
    cdef double[:] ov = out
    cdef Py_ssize_t i, k, k1
    cdef double ex, ey, rx, ry, ee, t, dx, dy, best, dd
    cdef bint outside
    with nogil:
        for i in range(npts):
            outside = False
            best = 1e308
            for k in range(nv):
                k1 = k + 1
                if k1 == nv:
                    k1 = 0
                ex = v[k1, 0] - v[k, 0]
                ey = v[k1, 1] - v[k, 1]
                rx = p[i, 0] - v[k, 0]
                ry = p[i, 1] - v[k, 1]
                if ex * ry - ey * rx < 0.0:
                    outside = True
                ee = ex * ex + ey * ey
                t = (rx * ex + ry * ey) / ee
                if t < 0.0:
                    t = 0.0
                elif t > 1.0:
                    t = 1.0
                dx = rx - t * ex
                dy = ry - t * ey
                dd = dx * dx + dy * dy
                if dd < best:
                    best = dd
            ov[i] = sqrt(best) if outside else 0.0
    return out
