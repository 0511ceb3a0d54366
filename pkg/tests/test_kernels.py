import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from shapeopt import _kernels
from shapeopt._kernels import _pykernels
from shapeopt.geometry import random_convex_polygon

BACKENDS = _kernels.backends()
finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@pytest.fixture(params=sorted(BACKENDS))
def k(request):
    return BACKENDS[request.param]


def isotonic_oracle(y, w):
    # min over left ends of max over right ends of block means
    n = len(y)
    out = np.empty(n)
    for i in range(n):
        out[i] = min(
            max(np.dot(w[a:b + 1], y[a:b + 1]) / w[a:b + 1].sum() for b in range(i, n))
            for a in range(i + 1)
        )
    return out


def segment_distance_oracle(p, v):
    n = len(v)
    inside = True
    best = math.inf
    for i in range(n):
        a, b = v[i], v[(i + 1) % n]
        e = b - a
        r = p - a
        if e[0] * r[1] - e[1] * r[0] < 0:
            inside = False
        t = min(1.0, max(0.0, float(np.dot(r, e) / np.dot(e, e))))
        best = min(best, float(np.hypot(*(r - t * e))))
    return 0.0 if inside else best


def test_backend_flag():
    assert _kernels.BACKEND in BACKENDS
    assert "python" in BACKENDS


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.integers(1, 25), elements=finite), st.data())
def test_pava_matches_minmax_formula(y, data):
    w = data.draw(arrays(np.float64, len(y), elements=st.floats(0.1, 5.0)))
    expected = isotonic_oracle(y, w)
    for mod in BACKENDS.values():
        np.testing.assert_allclose(mod.pava_nonincreasing(y, w), expected, rtol=1e-12, atol=1e-12)


def test_pava_already_monotone_is_identity(k):
    y = np.array([5.0, 3.0, 3.0, 1.0, -2.0])
    np.testing.assert_array_equal(k.pava_nonincreasing(y, np.ones(5)), y)


def test_pava_pools_violators(k):
    out = k.pava_nonincreasing(np.array([1.0, 3.0]), np.array([1.0, 1.0]))
    np.testing.assert_allclose(out, [2.0, 2.0])


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.integers(3, 60), elements=st.floats(-1, 3)), st.floats(0.1, 3.0))
def test_concave_projection_is_feasible_and_idempotent(u, M):
    n = len(u) - 1
    dr = 1.0 / n
    for mod in BACKENDS.values():
        p, sweeps = mod.project_concave_profile(u, M, dr)
        assert p.min() >= -1e-12 and p.max() <= M + 1e-12
        assert np.diff(p).max() <= 1e-9
        assert (p[2:] - 2 * p[1:-1] + p[:-2]).max() <= 1e-9
        again, _ = mod.project_concave_profile(p, M, dr)
        np.testing.assert_allclose(again, p, atol=1e-9)


def test_concave_projection_keeps_valid_profile(k):
    r = np.linspace(0, 1, 101)
    u = np.sqrt(1 - r ** 2)
    p, sweeps = k.project_concave_profile(u, 1.0, 0.01)
    np.testing.assert_allclose(p, u, atol=1e-12)
    assert sweeps == 1


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.integers(2, 200), elements=finite), st.floats(1e-3, 1.0))
def test_resistance_matches_vectorised_sum(u, dr):
    s = np.diff(u) / dr
    r_mid = (np.arange(len(s)) + 0.5) * dr
    expected = 2 * np.pi * np.sum(r_mid * dr / (1 + s * s))
    for mod in BACKENDS.values():
        assert mod.profile_resistance(u, dr) == pytest.approx(expected, rel=1e-12, abs=1e-300)


def test_resistance_of_flat_disk(k):
    assert k.profile_resistance(np.ones(1001), 1e-3) == pytest.approx(math.pi, rel=1e-12)


def test_polygon_distance_matches_segment_loop(k, rng):
    for _ in range(5):
        poly = random_convex_polygon(rng, int(rng.integers(3, 12)))
        pts = rng.uniform(-1.5, 1.5, (200, 2))
        got = k.convex_polygon_distance(pts, poly.vertices)
        expected = [segment_distance_oracle(p, poly.vertices) for p in pts]
        np.testing.assert_allclose(got, expected, atol=1e-14)


def test_backends_agree_on_random_inputs(rng):
    if len(BACKENDS) < 2:
        pytest.skip("compiled backend not built")
    c, p = BACKENDS["cython"], BACKENDS["python"]
    y, w = rng.normal(size=300), rng.uniform(0.5, 2, 300)
    np.testing.assert_allclose(c.pava_nonincreasing(y, w), p.pava_nonincreasing(y, w), rtol=1e-13)
    u = 1 - np.linspace(0, 1, 301) ** 2 + 0.05 * rng.normal(size=301)
    cu, cs = c.project_concave_profile(u, 1.0, 1 / 300)
    pu, ps = p.project_concave_profile(u, 1.0, 1 / 300)
    np.testing.assert_allclose(cu, pu, atol=1e-12)
    assert cs == ps
    assert c.profile_resistance(u, 0.01) == pytest.approx(p.profile_resistance(u, 0.01), rel=1e-13)


def test_pure_python_module_is_self_contained():
    assert _pykernels.profile_resistance(np.array([1.0, 0.0]), 1.0) == pytest.approx(2 * np.pi * 0.5 / 2)
