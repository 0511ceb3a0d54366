import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shapeopt.errors import DegenerateInput, MeshQualityFailure
from shapeopt.geometry import polygon_from_vertices, random_convex_polygon, regular_polygon
from shapeopt.mesh import check_mesh, polygon_angles, triangulate

SQUARE = polygon_from_vertices([(0, 0), (1, 0), (1, 1), (0, 1)])


def test_square_coarse_mesh_partitions_area():
    mesh = triangulate(SQUARE, 0.25)
    assert mesh.areas.sum() == pytest.approx(1.0, abs=1e-12)
    assert check_mesh(mesh, SQUARE) == []


def test_unit_square_h_half_is_rejected_as_too_coarse():
    # h = 0.5 exceeds diameter / 4 = 0.354 for the unit square
    with pytest.raises(DegenerateInput):
        triangulate(SQUARE, 0.5)


def test_halving_h_quadruples_dof():
    a = triangulate(SQUARE, 0.08).dof
    b = triangulate(SQUARE, 0.04).dof
    assert 0.7 * 4 <= b / a <= 1.3 * 4


def test_invalid_h():
    with pytest.raises(DegenerateInput):
        triangulate(SQUARE, 0.0)
    with pytest.raises(DegenerateInput):
        triangulate(SQUARE, math.inf)


def test_sharp_corner_reports_quality_failure():
    sliver = polygon_from_vertices([(0, 0), (1, 0), (0, 0.2)])
    assert np.degrees(polygon_angles(sliver).min()) < 20
    with pytest.raises(MeshQualityFailure):
        triangulate(sliver, 0.05)


def test_boundary_nodes_lie_on_boundary():
    disk = regular_polygon(64, 1.0)
    mesh = triangulate(disk, 0.1)
    depth = disk.signed_depth(mesh.nodes)
    assert np.all(np.abs(depth[mesh.boundary_nodes]) < 1e-12)
    assert np.all(depth[mesh.interior_nodes] > 1e-6)


def test_triangles_positively_oriented():
    mesh = triangulate(regular_polygon(7, 1.0), 0.1)
    assert mesh.areas.min() > 0


def test_mesh_is_read_only():
    mesh = triangulate(SQUARE, 0.2)
    with pytest.raises(ValueError):
        mesh.nodes[0, 0] = 5.0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([6, 10, 16]))
def test_random_polygon_mesh_invariants(seed, per_diameter):
    poly = random_convex_polygon(np.random.default_rng(seed))
    mesh = triangulate(poly, poly.diameter / per_diameter)
    assert check_mesh(mesh, poly) == []
    assert mesh.euler_characteristic() == 1
    assert mesh.min_angle() >= 20.0
    assert mesh.max_edge() <= 1.5 * mesh.h * (1 + 1e-12)
