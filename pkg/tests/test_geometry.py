import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from shapeopt.errors import (
    DegenerateInput,
    InfeasibleVolume,
    InputError,
    NegativeEpsilon,
    NonConvexInput,
    NonPositiveScale,
)
from shapeopt.geometry import (
    Box,
    bonnesen_check,
    clip_to_box,
    contains,
    convex_hull,
    disk_polygon,
    edge_normals,
    hausdorff_distance,
    inradius_center,
    jitter,
    minkowski_dilate,
    minkowski_mean,
    polygon_from_vertices,
    project_to_class,
    radial_parametrization,
    random_convex_polygon,
    random_hull,
    regular_polygon,
    scale_about,
)

SQUARE = polygon_from_vertices([(0, 0), (1, 0), (1, 1), (0, 1)])
TRIANGLE = polygon_from_vertices([(0, 0), (1, 0), (0, 1)])

seeds = st.integers(0, 2**32 - 1)


def random_poly(seed):
    return random_convex_polygon(np.random.default_rng(seed))


def chebyshev_lp(poly):
    # maximise rho subject to n_k . c + rho <= b_k
    n, _ = edge_normals(poly)
    b = np.einsum("ij,ij->i", n, poly.vertices)
    res = linprog([0, 0, -1], A_ub=np.column_stack([n, np.ones(len(n))]), b_ub=b,
                  bounds=[(None, None)] * 3, method="highs")
    return res.x[:2], res.x[2]


def boundary_samples(poly, per_edge=400):
    v = poly.vertices
    t = np.linspace(0, 1, per_edge, endpoint=False)[:, None]
    return np.concatenate([a + t * (b - a) for a, b in zip(v, np.roll(v, -1, axis=0))])


def brute_hausdorff(a, b):
    pa, pb = boundary_samples(a), boundary_samples(b)
    # for convex bodies the sup is attained on the boundary; points inside count as 0
    da = np.where(b.signed_depth(pa) >= 0, 0.0, np.min(np.linalg.norm(pa[:, None] - pb[None], axis=2), axis=1))
    db = np.where(a.signed_depth(pb) >= 0, 0.0, np.min(np.linalg.norm(pb[:, None] - pa[None], axis=2), axis=1))
    return max(da.max(), db.max())


# construction ---------------------------------------------------------------

def test_square_from_vertices():
    assert SQUARE.area == 1.0 and SQUARE.perimeter == 4.0
    np.testing.assert_array_equal(SQUARE.vertices[0], [0, 0])


def test_shuffled_vertices_give_same_square():
    other = polygon_from_vertices([(0, 0), (1, 1), (1, 0), (0, 1)])
    np.testing.assert_array_equal(other.vertices, SQUARE.vertices)


def test_interior_point_rejected():
    with pytest.raises(NonConvexInput):
        polygon_from_vertices([(0, 0), (1, 0), (0.5, 0.1), (0.5, 1)])


def test_collinear_points_rejected():
    with pytest.raises(DegenerateInput):
        polygon_from_vertices([(0, 0), (1, 1), (2, 2)])
    with pytest.raises(DegenerateInput):
        polygon_from_vertices([(0, 0), (1, 1)])


def test_non_finite_rejected():
    with pytest.raises(InputError):
        polygon_from_vertices([(0, 0), (1, 0), (math.nan, 1)])


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_vertices_ccw_from_lexicographic_minimum(seed):
    p = random_poly(seed)
    v = p.vertices
    assert tuple(v[0]) == min(map(tuple, v))
    e = np.roll(v, -1, axis=0) - v
    cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
    assert cross.min() > 0


# measures -------------------------------------------------------------------

def test_triangle_measures():
    assert TRIANGLE.area == pytest.approx(0.5, abs=1e-15)
    assert TRIANGLE.perimeter == pytest.approx(2 + math.sqrt(2), abs=1e-15)


def test_regular_64gon_area():
    assert regular_polygon(64).area == pytest.approx(32 * math.sin(2 * math.pi / 64), rel=1e-13)


def test_centroid_of_square():
    np.testing.assert_allclose(SQUARE.centroid, [0.5, 0.5])


# Chebyshev centre -------------------------------------------------------------

def test_inradius_square():
    c, rho = inradius_center(SQUARE)
    np.testing.assert_allclose(c, [0.5, 0.5], atol=1e-15)
    assert rho == pytest.approx(0.5, abs=1e-15)


def test_inradius_right_triangle():
    _, rho = inradius_center(TRIANGLE)
    assert rho == pytest.approx((2 - math.sqrt(2)) / 2, abs=1e-14)


def test_inradius_rectangle_tie_breaks_lexicographically():
    c, rho = inradius_center(polygon_from_vertices([(0, 0), (3, 0), (3, 1), (0, 1)]))
    assert rho == pytest.approx(0.5, abs=1e-15)
    np.testing.assert_allclose(c, [0.5, 0.5], atol=1e-14)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_inradius_matches_linear_program(seed):
    p = random_poly(seed)
    c, rho = inradius_center(p)
    _, rho_lp = chebyshev_lp(p)
    assert rho == pytest.approx(rho_lp, rel=1e-9)
    # the returned disk is inscribed
    assert p.signed_depth(c[None])[0] == pytest.approx(rho, rel=1e-9)


# Hausdorff ----------------------------------------------------------------------

def test_hausdorff_identity_and_translation():
    assert hausdorff_distance(SQUARE, SQUARE) == 0.0
    assert hausdorff_distance(SQUARE, SQUARE.translate((0.3, 0))) == pytest.approx(0.3, abs=1e-15)


def test_hausdorff_nested_squares():
    big = polygon_from_vertices([(0, 0), (2, 0), (2, 2), (0, 2)])
    assert hausdorff_distance(SQUARE, big) == pytest.approx(math.sqrt(2), abs=1e-15)
    assert brute_hausdorff(SQUARE, big) == pytest.approx(math.sqrt(2), abs=1e-6)


@settings(max_examples=15, deadline=None)
@given(seeds, seeds)
def test_hausdorff_matches_dense_sampling(s1, s2):
    a, b = random_poly(s1), random_poly(s2).translate((0.3, -0.2))
    d = hausdorff_distance(a, b)
    # discretisation error of the sampling is at most the sample spacing
    assert brute_hausdorff(a, b) == pytest.approx(d, abs=2.0 / 400)


@settings(max_examples=50, deadline=None)
@given(seeds, seeds, seeds)
def test_hausdorff_is_a_metric(s1, s2, s3):
    a, b, c = random_poly(s1), random_poly(s2), random_poly(s3).translate((0.5, 0))
    ab, bc, ac = hausdorff_distance(a, b), hausdorff_distance(b, c), hausdorff_distance(a, c)
    assert ab == hausdorff_distance(b, a)
    assert ac <= (ab + bc) * (1 + 1e-12)
    assert hausdorff_distance(a, a) == 0.0


# containment and transforms ------------------------------------------------------

def test_contains_examples():
    inner = polygon_from_vertices([(0.2, 0.2), (0.8, 0.2), (0.8, 0.8), (0.2, 0.8)])
    assert contains(SQUARE, inner)
    assert contains(SQUARE, SQUARE)
    assert not contains(SQUARE, SQUARE.translate((0.5, 0)))


def test_scale_about():
    assert np.array_equal(scale_about(SQUARE, (0.5, 0.5), 1.0).vertices, SQUARE.vertices)
    assert scale_about(SQUARE, SQUARE.centroid, 2.0).area == pytest.approx(4.0, rel=1e-14)
    with pytest.raises(NonPositiveScale):
        scale_about(SQUARE, (0, 0), 0.0)


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(0.05, 5.0))
def test_scaling_multiplies_area_by_square(seed, alpha):
    p = random_poly(seed)
    assert scale_about(p, (0.1, 0.2), alpha).area == pytest.approx(alpha**2 * p.area, rel=1e-12)


def test_dilation_zero_is_identity():
    assert minkowski_dilate(SQUARE, 0.0) is SQUARE
    with pytest.raises(NegativeEpsilon):
        minkowski_dilate(SQUARE, -0.1)


def test_dilation_steiner_area_and_perimeter():
    exact_area = 1 + 0.4 + math.pi * 0.01
    d = minkowski_dilate(SQUARE, 0.1, 32)
    assert exact_area - 1e-4 <= d.area <= exact_area
    perims = [minkowski_dilate(SQUARE, 0.1, n).perimeter for n in (4, 16, 64, 256)]
    assert all(a < b for a, b in zip(perims, perims[1:]))
    assert perims[-1] < 4 + 0.2 * math.pi
    assert perims[-1] == pytest.approx(4 + 0.2 * math.pi, abs=1e-5)


def test_dilation_corner_chord_normals_approach_radial_directions():
    worst = []
    for n in (4, 16, 64):
        d = minkowski_dilate(SQUARE, 0.1, n)
        normals, _ = edge_normals(d)
        start = d.vertices
        # chords of the arc around the corner (1, 1): both endpoints beyond it
        near = np.all(start > 1.0, axis=1) & np.all(np.roll(start, -1, axis=0) > 1.0, axis=1)
        radial = start[near] - 1.0
        radial /= np.linalg.norm(radial, axis=1)[:, None]
        cos = np.clip(np.sum(radial * normals[near], axis=1), -1, 1)
        worst.append(float(np.max(np.arccos(cos))))
        # a quarter arc cut into n chords: half a chord angle
        assert worst[-1] == pytest.approx(math.pi / (4 * n), rel=1e-6)
    assert worst[0] > worst[1] > worst[2]


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(0.01, 1.0))
def test_dilation_sandwich(seed, frac):
    p = random_poly(seed)
    c, rho = inradius_center(p)
    eps = frac * rho
    d = minkowski_dilate(p, eps, 16)
    assert contains(d, p)
    assert contains(scale_about(p, c, 1 + eps / rho), d)


# edge normals -----------------------------------------------------------------

def test_square_normals():
    n, lengths = edge_normals(SQUARE)
    np.testing.assert_allclose(n, [(0, -1), (1, 0), (0, 1), (-1, 0)], atol=1e-16)
    np.testing.assert_allclose(lengths, 1.0)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_closure_identity(seed):
    p = random_poly(seed)
    n, lengths = edge_normals(p)
    np.testing.assert_allclose((lengths[:, None] * n).sum(axis=0), 0.0, atol=1e-14)


# radial parametrization --------------------------------------------------------

def test_radial_disk_samples():
    disk = regular_polygon(256, 2.0)
    r = radial_parametrization(disk, 32)
    np.testing.assert_allclose(r.samples, 2.0, atol=1e-3)


def test_radial_square_axes_and_corner():
    r = radial_parametrization(SQUARE, 8)
    np.testing.assert_allclose(r.center, [0.5, 0.5])
    np.testing.assert_allclose(r.samples[::2], 0.5, atol=1e-15)
    assert r.samples[1] == pytest.approx(math.sqrt(2) / 2, abs=1e-15)


def test_radial_rejects_outside_center_and_small_n():
    with pytest.raises(InputError):
        radial_parametrization(SQUARE, 16, center=(2.0, 2.0))
    with pytest.raises(InputError):
        radial_parametrization(SQUARE, 4)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_radial_reconstruction_improves_on_dyadic_ladder(seed):
    p = random_poly(seed)
    errs = [hausdorff_distance(p, radial_parametrization(p, n).to_polygon()) for n in (16, 32, 64, 128, 256, 512)]
    assert all(b <= a + 1e-12 for a, b in zip(errs, errs[1:]))


# Bonnesen -----------------------------------------------------------------------

def test_bonnesen_square_and_disk():
    r = bonnesen_check(SQUARE)
    assert (r.area, r.perimeter, r.inradius, r.slack) == (1.0, 4.0, 0.5, 1.0)
    disk = regular_polygon(256, 1.0)
    assert bonnesen_check(disk).slack == pytest.approx(math.pi, abs=1e-2)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_bonnesen_strict(seed):
    p = random_hull(np.random.default_rng(seed), 6, Box((0, 0), (1, 1)))
    assert bonnesen_check(p).slack > 0


@settings(max_examples=50, deadline=None)
@given(seeds, st.floats(0.3, 0.95))
def test_perimeter_monotone_under_inclusion(seed, alpha):
    outer = random_poly(seed)
    rng = np.random.default_rng(seed + 1)
    # any convex body inside: hull of points drawn in a shrunk copy
    shrunk = scale_about(outer, inradius_center(outer)[0], alpha)
    w = rng.dirichlet(np.ones(len(shrunk)), size=8)
    inner_pts = w @ shrunk.vertices
    try:
        inner = convex_hull(inner_pts)
    except DegenerateInput:
        assume(False)
    assert contains(outer, inner)
    assert inner.perimeter <= outer.perimeter


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_measures_converge_along_jitter(seed):
    rng = np.random.default_rng(seed)
    p = random_poly(seed)
    for n in range(2, 12):
        q = jitter(p, 2.0**-n, rng)
        eps = hausdorff_distance(p, q)
        assert eps <= 2.0**-n
        # each body sits inside the eps-dilation of the other (Steiner bounds)
        assert abs(q.perimeter - p.perimeter) <= 2 * math.pi * eps + 1e-12
        assert abs(q.area - p.area) <= max(p.perimeter, q.perimeter) * eps + math.pi * eps**2 + 1e-12


# projection onto the admissible class --------------------------------------------

BOX4 = Box((0, 0), (4, 4))


def test_projection_fixed_point():
    p = polygon_from_vertices([(1, 1), (2, 1), (2, 2), (1, 2)])
    assert project_to_class(p, BOX4, 1.0) is p


def test_projection_pure_scaling():
    q = project_to_class(SQUARE, BOX4, 4.0)
    assert q.area == pytest.approx(4.0, rel=1e-9)
    e = np.diff(np.vstack([q.vertices, q.vertices[:1]]), axis=0)
    np.testing.assert_allclose(np.hypot(e[:, 0], e[:, 1]), 2.0, rtol=1e-9)


def test_projection_clip_then_scale():
    big = polygon_from_vertices([(-2, -2), (2, -2), (2, 2), (-2, 2)])
    # intersection with the box is [0,2]^2 (area 4), then scaled down to area 1
    assert clip_to_box(big, BOX4).area == pytest.approx(4.0)
    q = project_to_class(big, BOX4, 1.0)
    assert q.area == pytest.approx(1.0, rel=1e-9)
    assert BOX4.contains(q)


def test_projection_infeasible_volume():
    with pytest.raises(InfeasibleVolume):
        project_to_class(SQUARE, BOX4, 17.0)


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(0.2, 12.0))
def test_projection_lands_in_class(seed, m):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1, 5, (int(rng.integers(3, 20)), 2))
    try:
        q = project_to_class(pts, BOX4, m)
    except DegenerateInput:
        assume(False)
    assert BOX4.contains(q)
    assert abs(q.area - m) <= 1e-9 * m


# Minkowski mean ---------------------------------------------------------------------

def test_minkowski_mean_of_copies_is_the_body():
    p = random_poly(3)
    m = minkowski_mean([p, p, p])
    np.testing.assert_allclose(m.vertices, p.vertices, atol=1e-14)


def test_minkowski_mean_of_translates():
    p = random_poly(4)
    m = minkowski_mean([p, p.translate((1.0, 0.0))])
    np.testing.assert_allclose(m.vertices, p.translate((0.5, 0.0)).vertices, atol=1e-14)


def test_minkowski_mean_square_and_disk_area():
    # mixed area formula: |(A+B)/2| = (|A| + 2 V(A,B) + |B|) / 4 with V(square, unit disk) = 2
    disk = regular_polygon(4096, 1.0)
    m = minkowski_mean([SQUARE, disk])
    expected = (1 + 2 * (SQUARE.perimeter / 2) + disk.area) / 4
    assert m.area == pytest.approx(expected, rel=1e-6)


def test_box_parse_and_validation():
    b = Box.parse("0 0 4 2")
    assert b.area == 8.0 and b.perimeter == 12.0
    with pytest.raises(InputError):
        Box.parse("0 0 4")
    with pytest.raises(InputError):
        Box((1, 0), (0, 1))
    assert disk_polygon(math.pi).area == pytest.approx(math.pi, rel=1e-13)
